// Batch front end for the normalization library: defect scans, asymptotic
// fits, operator defect metrics, and the structural validation suites, with
// CSV or JSON output plus a JSON run manifest.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ksh/ksh.hpp"
#include "ksh/validate.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitValidation = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string group = "s1";
    std::string h = "quadratic";
    std::string tau1 = "0";
    std::string tau2 = "1";
    std::string hbar = "1";
    int lambda_max = 2;
    double tol = 1e-4;
    std::string format = "csv";
    std::string out;
    int modes = 16;           // stardefect/covariance truncation N
    std::string m_list = "1,2";
    int samples = 20;
    unsigned seed = 12345;
    bool tau2_set = false;
    bool hbar_set = false;
};

std::vector<double> parse_grid(const std::string& text, const std::string& flag,
                               bool require_positive) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw ConfigError(flag + ": empty grid entry");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError(flag + ": cannot parse '" + item + "'");
        }
        if (used != item.size()) throw ConfigError(flag + ": cannot parse '" + item + "'");
        if (require_positive && !(v > 0.0))
            throw ConfigError(flag + ": values must be > 0, got " + item);
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(flag + ": empty grid");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    for (double v : parse_grid(text, flag, false)) {
        const int i = static_cast<int>(std::lround(v));
        if (std::abs(v - i) > 1e-9) throw ConfigError(flag + ": expected integers");
        out.push_back(i);
    }
    return out;
}

ksh::RootSystem make_group(const std::string& spec) {
    if (spec == "s1") return ksh::RootSystem::torus(1);
    if (spec == "su2") return ksh::RootSystem::type_a(1);
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const std::string kind = spec.substr(0, colon);
        int r = 0;
        try {
            r = std::stoi(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("--group: bad rank in '" + spec + "'");
        }
        try {
            if (kind == "a") return ksh::RootSystem::type_a(r);
            if (kind == "torus") return ksh::RootSystem::torus(r);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--group: ") + e.what());
        }
    }
    throw ConfigError("--group: expected s1 | su2 | a:<r> | torus:<r>, got '" + spec + "'");
}

struct HSpec {
    ksh::Complexifier c;
    std::string family;
    std::string params;  // semicolon-joined profile coefficients
};

HSpec make_h(const std::string& spec) {
    if (spec == "quadratic")
        return {ksh::Complexifier::quadratic(), "quadratic", "0.5"};
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const std::string kind = spec.substr(0, colon);
        const std::string rest = spec.substr(colon + 1);
        if (kind == "quartic") {
            double eps = 0.0;
            try {
                eps = std::stod(rest);
            } catch (const std::exception&) {
                throw ConfigError("--h: bad quartic coefficient '" + rest + "'");
            }
            if (eps < 0.0) throw ConfigError("--h: quartic coefficient must be >= 0");
            char buf[64];
            std::snprintf(buf, sizeof buf, "0.5;%.17g", eps / 4.0);
            return {ksh::Complexifier::quartic(eps), "quartic", buf};
        }
        if (kind == "radial") {
            const auto coeffs = parse_grid(rest, "--h radial", false);
            std::string params;
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", coeffs[i]);
                params += (i ? ";" : "") + std::string(buf);
            }
            return {ksh::Complexifier::radial(coeffs), "radial", params};
        }
    }
    throw ConfigError("--h: expected quadratic | quartic:<eps> | radial:<c1,c2,...>, got '" +
                      spec + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_coords(const ksh::IVec& coords) {
    std::string out;
    for (int i = 0; i < coords.size(); ++i)
        out += (i ? ";" : "") + std::to_string(coords(i));
    return out;
}

std::string iso_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Accumulates rows, then emits CSV or JSON together with the manifest. CSV
// bytes depend only on the rows, so identical configs reproduce identical
// files; the timestamp lives in the manifest alone.
class TableWriter {
public:
    TableWriter(RunConfig cfg, std::vector<std::string> columns)
        : cfg_(std::move(cfg)), columns_(std::move(columns)), started_at_(iso_utc_now()) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns_.size())
            throw std::logic_error("row width does not match the header");
        // Fields carry no quoting layer; the separator may not appear inside.
        for (std::string& cell : cells)
            for (char& ch : cell)
                if (ch == ',') ch = ';';
        rows_.push_back(std::move(cells));
    }

    void note_quad_err(double e) { max_quad_err_ = std::max(max_quad_err_, e); }
    double max_quad_err() const { return max_quad_err_; }

    nlohmann::json manifest() const {
        nlohmann::json config{{"group", cfg_.group},   {"h", cfg_.h},
                              {"tau1", cfg_.tau1},     {"tau2", cfg_.tau2},
                              {"hbar", cfg_.hbar},     {"lambda_max", cfg_.lambda_max},
                              {"tol", cfg_.tol},       {"format", cfg_.format},
                              {"out", cfg_.out},       {"N", cfg_.modes},
                              {"m", cfg_.m_list},      {"samples", cfg_.samples},
                              {"seed", cfg_.seed}};
        return nlohmann::json{{"config", config},
                              {"version", kVersion},
                              {"started_at", started_at_},
                              {"rows_written", rows_.size()},
                              {"max_quad_err", max_quad_err_}};
    }

    void emit() const {
        std::string body;
        if (cfg_.format == "csv") {
            std::string line;
            for (std::size_t i = 0; i < columns_.size(); ++i)
                line += (i ? "," : "") + columns_[i];
            body = line + "\n";
            for (const auto& row : rows_) {
                line.clear();
                for (std::size_t i = 0; i < row.size(); ++i) line += (i ? "," : "") + row[i];
                body += line + "\n";
            }
        } else {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& row : rows_) {
                nlohmann::json obj;
                for (std::size_t i = 0; i < row.size(); ++i) obj[columns_[i]] = row[i];
                rows.push_back(obj);
            }
            body = nlohmann::json{{"manifest", manifest()}, {"rows", rows}}.dump(2) + "\n";
        }

        if (cfg_.out.empty()) {
            std::cout << body;
            if (cfg_.format == "csv") std::cerr << manifest().dump() << "\n";
        } else {
            std::ofstream f(cfg_.out, std::ios::binary);
            if (!f) throw NumericError("cannot open output file " + cfg_.out);
            f << body;
            std::ofstream mf(cfg_.out + ".manifest.json", std::ios::binary);
            mf << manifest().dump(2) << "\n";
        }
    }

private:
    RunConfig cfg_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    std::string started_at_;
    double max_quad_err_ = 0.0;
};

struct Problem {
    ksh::RootSystem sys;
    HSpec h;
    std::vector<double> tau1;
    std::vector<double> tau2;
    std::vector<double> hbar;
};

Problem resolve(const RunConfig& cfg) {
    if (cfg.lambda_max < 0) throw ConfigError("--lambda-max must be >= 0");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("--format: expected csv or json");
    return Problem{make_group(cfg.group), make_h(cfg.h),
                   parse_grid(cfg.tau1, "--tau1", false), parse_grid(cfg.tau2, "--tau2", true),
                   parse_grid(cfg.hbar, "--hbar", true)};
}

// Wraps per-row computation so that numeric failures report which weight and
// parameters were being processed.
template <typename F>
auto with_context(const ksh::DominantWeight& lam, double tau2, double hbar, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw NumericError("lambda=(" + fmt_coords(lam.coords) + ") tau2=" + fmt(tau2) +
                           " hbar=" + fmt(hbar) + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw NumericError("lambda=(" + fmt_coords(lam.coords) + ") tau2=" + fmt(tau2) +
                           " hbar=" + fmt(hbar) + ": " + e.what());
    }
}

int cmd_norms(const RunConfig& cfg) {
    const Problem pr = resolve(cfg);
    TableWriter table(cfg, {"group", "h_family", "h_params", "hbar", "tau1", "tau2", "lambda",
                            "h_lambda", "log_a2_shifted", "defect", "quad_err"});
    for (const auto& lam : ksh::enumerate_dominant(pr.sys, cfg.lambda_max))
        for (double t1 : pr.tau1)
            for (double t2 : pr.tau2)
                for (double hb : pr.hbar) {
                    const auto res = with_context(lam, t2, hb, [&] {
                        return ksh::a_lambda(pr.sys, pr.h.c, lam, ksh::QuantParams{t1, t2, hb});
                    });
                    table.note_quad_err(res.quad_err);
                    table.add_row({cfg.group, pr.h.family, pr.h.params, fmt(hb), fmt(t1), fmt(t2),
                                   fmt_coords(lam.coords), fmt(res.h_lambda),
                                   fmt(res.log_a2_shifted), fmt(res.defect), fmt(res.quad_err)});
                }
    if (table.max_quad_err() > cfg.tol)
        throw NumericError("max quad_err " + fmt(table.max_quad_err()) + " exceeds --tol " +
                           fmt(cfg.tol));
    table.emit();
    return kExitOk;
}

int cmd_b1fit(const RunConfig& cfg) {
    const Problem pr = resolve(cfg);
    std::vector<double> grid = cfg.tau2_set ? pr.tau2
                                            : std::vector<double>{5.0, 10.0, 20.0, 40.0, 80.0};
    if (grid.size() < 4) throw ConfigError("--tau2: the fit needs at least 4 grid values");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("--tau2: the fit grid must be strictly increasing");
    if (pr.hbar.size() != 1) throw ConfigError("--hbar: the fit takes a single value");
    const double hb = pr.hbar[0];
    const bool circle = pr.sys.family == ksh::GroupFamily::Torus && pr.sys.rank == 1;

    TableWriter table(cfg, {"group", "h_family", "h_params", "hbar", "lambda", "b1_fit",
                            "b1_closed", "rel_gap", "residual"});
    for (const auto& lam : ksh::enumerate_dominant(pr.sys, cfg.lambda_max)) {
        const auto fit = with_context(lam, grid.back(), hb, [&] {
            return ksh::fit_b1(pr.sys, pr.h.c, lam, hb, grid);
        });
        std::string closed, gap;
        if (circle) {
            const double b1 = ksh::b1_circle_closed(pr.h.c, lam.coords(0), hb);
            closed = fmt(b1);
            gap = fmt(std::abs(fit.b1_estimate - b1) / std::max(std::abs(b1), 1e-30));
        }
        table.add_row({cfg.group, pr.h.family, pr.h.params, fmt(hb), fmt_coords(lam.coords),
                       fmt(fit.b1_estimate), closed, gap, fmt(fit.residual)});
    }
    table.emit();
    return kExitOk;
}

int cmd_semiclassical(const RunConfig& cfg) {
    const Problem pr = resolve(cfg);
    std::vector<double> hgrid = pr.hbar;
    if (!cfg.hbar_set) hgrid = {1.0, 0.5, 0.25, 0.125};
    for (std::size_t i = 1; i < hgrid.size(); ++i)
        if (!(hgrid[i] < hgrid[i - 1]))
            throw ConfigError("--hbar: the scan grid must be strictly decreasing");
    TableWriter table(cfg, {"group", "h_family", "h_params", "tau2", "hbar", "lambda", "ratio",
                            "abs_gap"});
    for (const auto& lam : ksh::enumerate_dominant(pr.sys, cfg.lambda_max))
        for (double t2 : pr.tau2) {
            const auto ratios = with_context(lam, t2, hgrid.front(), [&] {
                return ksh::semiclassical_scan(pr.sys, pr.h.c, lam, t2, hgrid);
            });
            for (std::size_t i = 0; i < hgrid.size(); ++i)
                table.add_row({cfg.group, pr.h.family, pr.h.params, fmt(t2), fmt(hgrid[i]),
                               fmt_coords(lam.coords), fmt(ratios[i]),
                               fmt(std::abs(ratios[i] - 1.0))});
        }
    table.emit();
    return kExitOk;
}

void require_circle(const Problem& pr, const char* cmd) {
    if (pr.sys.family != ksh::GroupFamily::Torus || pr.sys.rank != 1)
        throw ConfigError(std::string(cmd) + ": only the circle model is supported");
}

int cmd_stardefect(const RunConfig& cfg) {
    const Problem pr = resolve(cfg);
    require_circle(pr, "stardefect");
    if (cfg.modes < 1) throw ConfigError("-N must be >= 1");
    const auto modes = parse_int_list(cfg.m_list, "--m");
    for (int m : modes)
        if (2 * std::abs(m) > cfg.modes) throw ConfigError("--m: |m| must be at most N/2");
    const auto space = ksh::TruncatedHilbert::circle(cfg.modes);

    TableWriter table(cfg, {"group", "h_family", "h_params", "hbar", "tau2", "N", "m",
                            "star_defect"});
    for (double t2 : pr.tau2)
        for (double hb : pr.hbar) {
            std::vector<double> coeffs;
            coeffs.reserve(space.dim());
            for (int n : space.modes) {
                ksh::IVec cc(1);
                cc(0) = n;
                const auto lam = pr.sys.weight(cc);
                const auto res = with_context(lam, t2, hb, [&] {
                    return ksh::a_lambda(pr.sys, pr.h.c, lam, ksh::QuantParams{0.0, t2, hb});
                });
                table.note_quad_err(res.quad_err);
                coeffs.push_back(std::exp(0.5 * res.log_a2_shifted));
            }
            for (int m : modes)
                table.add_row({cfg.group, pr.h.family, pr.h.params, fmt(hb), fmt(t2),
                               std::to_string(cfg.modes), std::to_string(m),
                               fmt(ksh::star_defect(space, m, coeffs))});
        }
    if (table.max_quad_err() > cfg.tol)
        throw NumericError("max quad_err " + fmt(table.max_quad_err()) + " exceeds --tol " +
                           fmt(cfg.tol));
    table.emit();
    return kExitOk;
}

int cmd_covariance(const RunConfig& cfg) {
    const Problem pr = resolve(cfg);
    require_circle(pr, "covariance");
    if (cfg.modes < 1) throw ConfigError("-N must be >= 1");
    if (cfg.samples < 1) throw ConfigError("--samples must be >= 1");
    const auto space = ksh::TruncatedHilbert::circle(cfg.modes);

    TableWriter table(cfg, {"group", "h_family", "h_params", "hbar", "tau2", "N", "m", "theta1",
                            "theta2", "covariance_defect"});
    for (double t2 : pr.tau2)
        for (double hb : pr.hbar) {
            const auto lam0 = pr.sys.weight({0});
            const auto coeffs = with_context(lam0, t2, hb, [&] {
                return ksh::ksh_coefficients(space, pr.sys, pr.h.c,
                                             ksh::QuantParams{0.0, t2, hb});
            });
            std::mt19937 rng(cfg.seed);
            std::uniform_real_distribution<double> angle(0.0, 1.0);
            std::uniform_int_distribution<int> mode(-cfg.modes / 2, cfg.modes / 2);
            for (int i = 0; i < cfg.samples; ++i) {
                const double th1 = angle(rng), th2 = angle(rng);
                const int m = mode(rng);
                table.add_row({cfg.group, pr.h.family, pr.h.params, fmt(hb), fmt(t2),
                               std::to_string(cfg.modes), std::to_string(m), fmt(th1), fmt(th2),
                               fmt(ksh::covariance_defect(space, th1, th2, m, coeffs))});
            }
        }
    table.emit();
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg) {
    const Problem pr = resolve(cfg);
    TableWriter table(cfg, {"group", "h_family", "check", "status", "worst", "tolerance",
                            "detail"});
    bool all_pass = true;
    const auto checks = ksh::run_validation(pr.sys, pr.h.c, pr.hbar[0], pr.tau2[0]);
    for (const auto& chk : checks) {
        all_pass = all_pass && chk.pass;
        table.add_row({cfg.group, pr.h.family, chk.name, chk.pass ? "pass" : "fail",
                       fmt(chk.worst), fmt(chk.tolerance), chk.detail});
    }
    table.emit();
    return all_pass ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"normalization constants and defect metrics for coherent-state transforms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    RunConfig cfg;
    std::string command;

    auto add_common = [&](CLI::App* sub) {
        // The profile flag is spelled --h, so the subcommand help keeps only
        // its long spelling.
        sub->set_help_flag("--help", "print this help and exit");
        sub->add_option("--group", cfg.group, "s1 | su2 | a:<r> | torus:<r>");
        sub->add_option("--h", cfg.h, "quadratic | quartic:<eps> | radial:<c1,c2,...>");
        sub->add_option("--tau1", cfg.tau1, "tau1 value or comma grid");
        sub->add_option("--tau2", cfg.tau2, "tau2 value or comma grid")
            ->each([&](const std::string&) { cfg.tau2_set = true; });
        sub->add_option("--hbar", cfg.hbar, "hbar value or comma grid")
            ->each([&](const std::string&) { cfg.hbar_set = true; });
        sub->add_option("--lambda-max", cfg.lambda_max, "weight coordinate cutoff");
        sub->add_option("--tol", cfg.tol, "largest acceptable quadrature error");
        sub->add_option("--format", cfg.format, "csv | json");
        sub->add_option("--out", cfg.out, "output path (manifest goes to <out>.manifest.json)");
        sub->callback([&, sub] { command = sub->get_name(); });
    };

    add_common(app.add_subcommand("norms", "normalization defects over a parameter grid"));
    add_common(app.add_subcommand("b1-fit", "large-tau2 correction coefficient fits"));
    add_common(app.add_subcommand("semiclassical", "shifted ratios along an hbar grid"));
    auto* star = app.add_subcommand("stardefect", "adjoint defect of the conjugated modes");
    add_common(star);
    star->add_option("-N", cfg.modes, "mode truncation");
    star->add_option("--m", cfg.m_list, "comma list of character modes");
    auto* cov = app.add_subcommand("covariance", "covariance residuals at random angles");
    add_common(cov);
    cov->add_option("-N", cfg.modes, "mode truncation");
    cov->add_option("--samples", cfg.samples, "number of random angle draws");
    cov->add_option("--seed", cfg.seed, "random seed");
    add_common(app.add_subcommand("validate", "structural property suites"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (command == "norms") return cmd_norms(cfg);
        if (command == "b1-fit") return cmd_b1fit(cfg);
        if (command == "semiclassical") return cmd_semiclassical(cfg);
        if (command == "stardefect") return cmd_stardefect(cfg);
        if (command == "covariance") return cmd_covariance(cfg);
        if (command == "validate") return cmd_validate(cfg);
        std::cerr << "error: no command selected\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
