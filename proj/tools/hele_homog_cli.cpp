// hele-homog: command-line front end for the homogenization toolkit.
//
// Exit codes: 0 success, 1 validation failure, 2 numerical failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <hele_homog/hele_homog.hpp>

namespace hh = hele_homog;
using json = nlohmann::json;

namespace {

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config files: {"version": 1, "<flag>": value, ...}; flags given on the
// command line win over file values.

class Bindings {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& desc) {
        CLI::Option* opt = app->add_option("--" + flag, var, desc);
        setters_[key(flag)] = {opt, [&var](const json& j) { var = j.get<T>(); }};
        return opt;
    }

    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, std::optional<T>& var, const std::string& desc) {
        CLI::Option* opt = app->add_option("--" + flag, var, desc);
        setters_[key(flag)] = {opt, [&var](const json& j) { var = j.get<T>(); }};
        return opt;
    }

    // Medium entries accept a string spec or an inline JSON object.
    CLI::Option* add_medium(CLI::App* app, std::string& var) {
        CLI::Option* opt = app->add_option("--medium", var, "builtin:NAME, a JSON file, or an inline JSON object");
        setters_["medium"] = {opt, [&var](const json& j) { var = j.is_string() ? j.get<std::string>() : j.dump(); }};
        return opt;
    }

    void apply(const std::string& path) const {
        std::ifstream in(path);
        if (!in) throw ValidationError(fmt::format("cannot open config file '{}'", path));
        json cfg;
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ValidationError(fmt::format("config '{}': {}", path, e.what()));
        }
        if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
        if (!cfg.contains("version") || cfg["version"] != 1)
            throw ValidationError("config must declare \"version\": 1");
        for (const auto& [k, v] : cfg.items()) {
            if (k == "version") continue;
            const auto it = setters_.find(k);
            if (it == setters_.end()) throw ValidationError(fmt::format("config: unknown key '{}'", k));
            if (it->second.opt->count() > 0) continue;
            try {
                it->second.set(v);
            } catch (const json::exception& e) {
                throw ValidationError(fmt::format("config: bad value for '{}': {}", k, e.what()));
            }
        }
    }

private:
    struct Setter {
        CLI::Option* opt;
        std::function<void(const json&)> set;
    };
    static std::string key(std::string flag) {
        for (auto& c : flag)
            if (c == '-') c = '_';
        return flag;
    }
    std::map<std::string, Setter> setters_;
};

struct Command {
    CLI::App* app{};
    Bindings bind;
    std::string config;
    std::function<void()> run;

    void add_config() { app->add_option("--config", config, "JSON config file (\"version\": 1)"); }
};

// ---------------------------------------------------------------------------
// Shared helpers

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("HELE_HOMOG_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("HELE_HOMOG_SEED='{}' is not an unsigned integer", env));
        }
    }
    return 0;
}

hh::Medium medium_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("medium JSON must be an object");
    for (const auto& [k, v] : j.items())
        if (k != "dim" && k != "expr" && k != "builtin") throw ValidationError(fmt::format("medium: unknown key '{}'", k));
    if (j.contains("builtin")) {
        if (j.contains("expr")) throw ValidationError("medium: give either \"builtin\" or \"expr\"");
        return hh::builtin_medium(j["builtin"].get<std::string>());
    }
    if (!j.contains("expr") || !j.contains("dim")) throw ValidationError("medium: needs \"dim\" and \"expr\"");
    return hh::Medium::parse(j["expr"].get<std::string>(), j["dim"].get<int>());
}

hh::Medium resolve_medium(const std::string& spec) {
    if (spec.empty()) throw ValidationError("a medium is required (--medium)");
    if (spec.rfind("builtin:", 0) == 0) return hh::builtin_medium(spec.substr(8));
    try {
        if (spec.front() == '{') return medium_from_json(json::parse(spec));
        std::ifstream in(spec);
        if (!in) throw ValidationError(fmt::format("cannot open medium file '{}'", spec));
        return medium_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("medium '{}': {}", spec, e.what()));
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("bad number '{}' in list '{}'", item, s));
        }
    }
    if (out.empty()) throw ValidationError("empty list");
    return out;
}

// Writes to a file, or stdout when the path is empty.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw ValidationError(fmt::format("cannot write '{}'", path));
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string num(double v) { return fmt::format("{}", v); }

void write_svg(const std::string& path, const std::vector<std::vector<std::pair<double, double>>>& lines,
               const std::string& xlabel, const std::string& ylabel) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& l : lines)
        for (auto [x, y] : l) {
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    const double W = 640, H = 480, pad = 50;
    auto sx = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
    auto sy = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };
    Output out(path);
    auto& os = out.os();
    fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", W, H);
    fmt::print(os, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>\n", pad, pad,
               W - 2 * pad, H - 2 * pad);
    for (const auto& l : lines) {
        std::string pts;
        for (auto [x, y] : l) pts += fmt::format("{:.2f},{:.2f} ", sx(x), sy(y));
        fmt::print(os, "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{}\"/>\n", pts);
    }
    fmt::print(os, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", W / 2, H - 12, xlabel);
    fmt::print(os, "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>\n", H / 2,
               H / 2, ylabel);
    fmt::print(os, "<text x=\"{}\" y=\"{}\" font-size=\"10\">{:.4g}..{:.4g} x {:.4g}..{:.4g}</text>\n", pad, pad - 8,
               x0, x1, y0, y1);
    os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// medium check

void setup_medium_check(CLI::App& parent, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>();
    c->app = parent.add_subcommand("check", "Parse a medium and report bounds and periodicity");
    struct Opts {
        std::string expr, medium;
        int dim{1}, resolution{64}, trials{200};
        std::optional<std::uint64_t> seed;
    };
    auto o = std::make_shared<Opts>();
    c->add_config();
    c->bind.add(c->app, "expr", o->expr, "expression in x1..xn and t");
    c->bind.add(c->app, "dim", o->dim, "spatial dimension for --expr");
    c->bind.add_medium(c->app, o->medium);
    c->bind.add(c->app, "resolution", o->resolution, "grid samples per unit period for the bounds");
    c->bind.add(c->app, "trials", o->trials, "random periodicity probes");
    c->app->add_option("--seed", o->seed, "sampling seed (default HELE_HOMOG_SEED or 0)");
    c->run = [o] {
        if (o->expr.empty() == o->medium.empty()) throw ValidationError("give exactly one of --expr or --medium");
        const hh::Medium g = o->expr.empty() ? resolve_medium(o->medium) : hh::Medium::parse(o->expr, o->dim);
        const auto b = hh::estimate_bounds(g, o->resolution);
        const auto p = hh::check_periodicity(g, o->trials, resolve_seed(o->seed));
        json out{{"expr", g.source()},
                 {"dim", g.dim()},
                 {"constant", g.expr().is_constant()},
                 {"time_dependent", !g.is_time_independent()},
                 {"bounds", {{"m", b.m}, {"M", b.M}, {"L", b.L}, {"resolution", b.resolution}}},
                 {"periodicity", {{"max_deviation", p.max_deviation}, {"trials", p.trials}}}};
        std::cout << out.dump(2) << "\n";
    };
    cmds.push_back(std::move(c));
}

// ---------------------------------------------------------------------------
// rq curve | obstacle | candidates

void setup_rq(CLI::App& parent, std::vector<std::unique_ptr<Command>>& cmds) {
    {
        auto c = std::make_unique<Command>();
        c->app = parent.add_subcommand("curve", "Sample the effective velocity r(q)");
        struct Opts {
            std::string medium, out, svg;
            double qmin{0.1}, qmax{2.0}, T{200.0}, dt{hh::kDefaultVelocityDt};
            int samples{20}, jobs{1};
        };
        auto o = std::make_shared<Opts>();
        c->add_config();
        c->bind.add_medium(c->app, o->medium);
        c->bind.add(c->app, "qmin", o->qmin, "smallest gradient");
        c->bind.add(c->app, "qmax", o->qmax, "largest gradient");
        c->bind.add(c->app, "samples", o->samples, "number of q values");
        c->bind.add(c->app, "T", o->T, "integration horizon (>= 10)");
        c->bind.add(c->app, "dt", o->dt, "RK4 step");
        c->bind.add(c->app, "jobs", o->jobs, "worker threads");
        c->bind.add(c->app, "out", o->out, "CSV output (stdout if omitted)");
        c->bind.add(c->app, "svg", o->svg, "optional SVG plot");
        c->run = [o] {
            const auto g = resolve_medium(o->medium);
            const auto curve = hh::velocity_curve(g, o->qmin, o->qmax, o->samples, o->T, o->jobs, o->dt);
            Output out(o->out);
            out.os() << "q [pressure/length],r_hat [length/time],err [length/time]\n";
            for (const auto& p : curve.points) out.os() << num(p.q) << ',' << num(p.r_hat) << ',' << num(p.error_bound) << '\n';
            for (auto i : curve.apparent_jumps)
                fmt::print(std::cerr, "apparent jump between q={} and q={}\n", curve.points[i].q, curve.points[i + 1].q);
            if (!o->svg.empty()) {
                std::vector<std::pair<double, double>> line;
                for (const auto& p : curve.points) line.emplace_back(p.q, p.r_hat);
                write_svg(o->svg, {line}, "q", "r_hat");
            }
        };
        cmds.push_back(std::move(c));
    }
    {
        auto c = std::make_unique<Command>();
        c->app = parent.add_subcommand("obstacle", "Clipped obstacle front and its flatness");
        struct Opts {
            std::string medium, out, side{"super"};
            double q{1.0}, r{1.0}, eps{0.05}, T{1.0};
            std::optional<double> dt;
        };
        auto o = std::make_shared<Opts>();
        c->add_config();
        c->bind.add_medium(c->app, o->medium);
        c->bind.add(c->app, "q", o->q, "gradient");
        c->bind.add(c->app, "r", o->r, "obstacle speed");
        c->bind.add(c->app, "eps", o->eps, "oscillation scale");
        c->bind.add(c->app, "side", o->side, "sub or super")->check(CLI::IsMember({"sub", "super"}));
        c->bind.add(c->app, "T", o->T, "time horizon");
        c->bind.add(c->app, "dt", o->dt, "time step (default eps/20)");
        c->bind.add(c->app, "out", o->out, "CSV output (stdout if omitted)");
        c->run = [o] {
            const auto g = resolve_medium(o->medium);
            const auto side = o->side == "sub" ? hh::ObstacleSide::Sub : hh::ObstacleSide::Super;
            const auto run = hh::obstacle_front(o->q, o->r, o->eps, side, o->T, o->dt.value_or(o->eps / 20.0), g);
            Output out(o->out);
            out.os() << "t [time],front [length],phi [length]\n";
            const auto& tr = run.front.trace;
            for (std::size_t k = 0; k < tr.times.size(); ++k)
                out.os() << num(tr.times[k]) << ',' << num(tr.positions[k]) << ',' << num(run.flatness.phi[k]) << '\n';
            const auto chk = hh::flatness_lipschitz_check(run.flatness, o->q, o->r, hh::estimate_bounds(g, 64));
            fmt::print(std::cerr, "flatness: monotone={} lipschitz={} worst_excess={}\n", chk.monotone, chk.lipschitz,
                       chk.worst_excess);
        };
        cmds.push_back(std::move(c));
    }
    {
        auto c = std::make_unique<Command>();
        c->app = parent.add_subcommand("candidates", "Homogenized velocity candidates by bisection");
        struct Opts {
            std::string medium, eps{"0.1,0.05,0.02"};
            double q{1.0}, beta{0.9}, T{1.0};
        };
        auto o = std::make_shared<Opts>();
        c->add_config();
        c->bind.add_medium(c->app, o->medium);
        c->bind.add(c->app, "q", o->q, "gradient");
        c->bind.add(c->app, "beta", o->beta, "flatness exponent in (0.8, 1)");
        c->bind.add(c->app, "eps", o->eps, "decreasing comma-separated eps list");
        c->bind.add(c->app, "T", o->T, "time horizon");
        c->run = [o] {
            const auto g = resolve_medium(o->medium);
            const auto eps = parse_list(o->eps);
            hh::CandidateOptions opt;
            opt.beta = o->beta;
            opt.T = o->T;
            const auto cand = hh::homogenized_candidates(g, o->q, eps, opt);
            std::cout << "quantity,value\n";
            std::cout << "r_lower," << num(cand.r_lower) << '\n';
            std::cout << "r_upper," << num(cand.r_upper) << '\n';
            std::cout << "gap," << num(std::abs(cand.r_upper - cand.r_lower)) << '\n';
            std::cout << "expected_tolerance," << num(hh::tolerance_from(eps, o->beta)) << '\n';
            std::cout << "bracketed," << (cand.bracketed() ? 1 : 0) << '\n';
        };
        cmds.push_back(std::move(c));
    }
}

// ---------------------------------------------------------------------------
// timescale eval

void setup_timescale(CLI::App& parent, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>();
    c->app = parent.add_subcommand("eval", "Evaluate f_sub, f_super or theta");
    struct Opts {
        std::string kind{"sub"}, out;
        double alpha{1.0}, gamma{1.0}, lambda{0.0};
        std::optional<double> t, tmin, tmax;
        int samples{50};
    };
    auto o = std::make_shared<Opts>();
    c->add_config();
    c->bind.add(c->app, "kind", o->kind, "sub, super or theta")->check(CLI::IsMember({"sub", "super", "theta"}));
    c->bind.add(c->app, "alpha", o->alpha, "alpha > 0");
    c->bind.add(c->app, "gamma", o->gamma, "gamma > 0");
    c->bind.add(c->app, "lambda", o->lambda, "lambda >= 0");
    c->bind.add(c->app, "t", o->t, "single evaluation time");
    c->bind.add(c->app, "tmin", o->tmin, "table start");
    c->bind.add(c->app, "tmax", o->tmax, "table end");
    c->bind.add(c->app, "samples", o->samples, "table rows");
    c->bind.add(c->app, "out", o->out, "CSV output (stdout if omitted)");
    c->run = [o] {
        std::function<hh::ScalingEval(double)> f;
        if (o->kind == "sub") {
            const hh::SubScaling s(o->alpha, o->gamma, o->lambda);
            f = [s](double t) { return hh::f_sub_eval(t, s); };
        } else if (o->kind == "super") {
            const hh::SuperScaling s(o->alpha, o->gamma, o->lambda);
            f = [s](double t) { return hh::f_super_eval(t, s); };
        } else {
            const hh::ThetaShift s(o->gamma, o->lambda);
            f = [s](double t) { return hh::theta_shift_eval(t, s); };
        }
        Output out(o->out);
        if (o->t) {
            if (o->tmin || o->tmax) throw ValidationError("give either --t or --tmin/--tmax");
            const auto e = f(*o->t);
            out.os() << "quantity,value\n";
            out.os() << "value," << num(e.value) << '\n';
            out.os() << "derivative," << num(e.d1) << '\n';
            out.os() << "second_derivative," << num(e.d2) << '\n';
            return;
        }
        if (!o->tmin || !o->tmax) throw ValidationError("give --t or both --tmin and --tmax");
        if (o->samples < 2 || !(*o->tmax > *o->tmin)) throw ValidationError("table needs tmax > tmin and samples >= 2");
        out.os() << "t [time],value [time],derivative [1],second_derivative [1/time]\n";
        for (int i = 0; i < o->samples; ++i) {
            const double t = *o->tmin + (*o->tmax - *o->tmin) * i / (o->samples - 1);
            const auto e = f(t);
            out.os() << num(t) << ',' << num(e.value) << ',' << num(e.d1) << ',' << num(e.d2) << '\n';
        }
    };
    cmds.push_back(std::move(c));
}

// ---------------------------------------------------------------------------
// barrier verify

void setup_barrier(CLI::App& parent, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>();
    c->app = parent.add_subcommand("verify", "Residual table for the explicit barriers");
    struct Opts {
        std::string kind{"expanding"}, format{"csv"};
        int n{2}, points{100};
        double m{1.0}, M{1.0}, K{1.0}, A{0.5}, mu{1.0}, chi{1.0}, kappa{1e-3};
        std::optional<std::uint64_t> seed;
    };
    auto o = std::make_shared<Opts>();
    c->add_config();
    c->bind.add(c->app, "kind", o->kind, "expanding, contracting, perturbed or thin-cylinder")
        ->check(CLI::IsMember({"expanding", "contracting", "perturbed", "thin-cylinder"}));
    c->bind.add(c->app, "n", o->n, "space dimension");
    c->bind.add(c->app, "m", o->m, "lower medium bound");
    c->bind.add(c->app, "M", o->M, "upper medium bound");
    c->bind.add(c->app, "K", o->K, "expanding data level");
    c->bind.add(c->app, "A", o->A, "expanding inner ratio in (0, 1)");
    c->bind.add(c->app, "mu", o->mu, "contracting outer radius");
    c->bind.add(c->app, "chi", o->chi, "constant contracting boundary data");
    c->bind.add(c->app, "kappa", o->kappa, "perturbation size");
    c->bind.add(c->app, "points", o->points, "sample count");
    c->bind.add(c->app, "format", o->format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c->app->add_option("--seed", o->seed, "sampling seed (default HELE_HOMOG_SEED or 0)");
    c->run = [o] {
        std::mt19937_64 rng(resolve_seed(o->seed));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        hh::BarrierReport rep;
        if (o->kind == "expanding") {
            const auto b = hh::expanding_barrier(o->n, o->m, o->K, o->A);
            double worst = 0.0;
            for (int i = 0; i < o->points; ++i) worst = std::max(worst, hh::check_expanding_fbc(b, 0.01 + 10.0 * u(rng)));
            rep.checks.push_back({"|rho' - m |D phi+||", worst, static_cast<std::size_t>(o->points), worst <= 1e-8});
        } else if (o->kind == "contracting" || o->kind == "perturbed") {
            const double chi = o->chi;
            const auto b = hh::contracting_barrier(o->n, o->M, o->mu, [chi](double) { return chi; },
                                                   [chi](double t) { return chi * t; });
            const double t0 = -o->mu * o->mu / (2.0 * o->n * o->M * chi);
            if (o->kind == "contracting") {
                double worst = 0.0;
                bool decreasing = true;
                double prev = std::numeric_limits<double>::infinity();
                for (int i = 1; i <= o->points; ++i) {
                    const double t = t0 * (1.0 - static_cast<double>(i) / (o->points + 1));
                    const double rho = b.radius(t);
                    worst = std::max(worst, std::abs(hh::contracting_lhs(o->n, o->mu, rho) - o->M * chi * t));
                    if (!(rho < prev)) decreasing = false;
                    prev = rho;
                }
                rep.checks.push_back({"radius equation residual", worst, static_cast<std::size_t>(o->points), worst <= 1e-10});
                rep.checks.push_back({"radius strictly decreasing", decreasing ? 0.0 : 1.0,
                                      static_cast<std::size_t>(o->points), decreasing});
            } else {
                const auto field = hh::perturbed_contracting_field(b, chi, o->kappa);
                const double M = o->M;
                std::vector<hh::SpaceTimePoint> pts;
                for (int i = 0; i < o->points; ++i) {
                    const double t = t0 * (0.1 + 0.8 * u(rng));
                    Eigen::VectorXd dir = Eigen::VectorXd::Zero(o->n);
                    for (int k = 0; k < o->n; ++k) dir[k] = u(rng) - 0.5;
                    dir /= dir.norm();
                    const double rho = b.radius(t);
                    pts.push_back({rho * dir, t});
                    pts.push_back({(rho + (o->mu - rho) * u(rng)) * dir, t});
                }
                rep = hh::check_superbarrier(field, [M](const Eigen::VectorXd&, double) { return M; }, pts, 1e-6);
            }
        } else {
            double worst = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < o->points; ++i) {
                const double xp = 3.0 * u(rng);
                const double xn = (std::numbers::pi / 2 - 1e-3) * (2.0 * u(rng) - 1.0);
                worst = std::max(worst, hh::thin_cylinder_phi(xp, xn, o->n).laplacian);
            }
            rep.checks.push_back({"max laplacian (must be < 0)", worst, static_cast<std::size_t>(o->points), worst < 0.0});
        }
        if (o->format == "json") {
            json j{{"kind", o->kind}, {"pass", rep.pass()}, {"checks", json::array()}};
            for (const auto& ch : rep.checks)
                j["checks"].push_back({{"name", ch.name}, {"residual", ch.residual}, {"points", ch.points}, {"pass", ch.pass}});
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << "check,points,residual,pass\n";
            for (const auto& ch : rep.checks)
                std::cout << '"' << ch.name << "\"," << ch.points << ',' << num(ch.residual) << ',' << (ch.pass ? 1 : 0) << '\n';
        }
        if (!rep.pass()) throw hh::NumericalError("barrier verification failed");
    };
    cmds.push_back(std::move(c));
}

// ---------------------------------------------------------------------------
// geometry report

void setup_geometry(CLI::App& parent, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>();
    c->app = parent.add_subcommand("report", "Cone angles, vertex speeds and matching-wave margins");
    struct Opts {
        std::vector<double> q{1.0, 0.0};
        double r{1.0}, m{1.0}, M{2.0};
        int draws{32};
    };
    auto o = std::make_shared<Opts>();
    c->add_config();
    c->bind.add(c->app, "q", o->q, "gradient components (n >= 2)")->delimiter(',');
    c->bind.add(c->app, "r", o->r, "planar speed");
    c->bind.add(c->app, "m", o->m, "lower medium bound");
    c->bind.add(c->app, "M", o->M, "upper medium bound");
    c->bind.add(c->app, "draws", o->draws, "directions sampled on Xi");
    c->run = [o] {
        const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(o->q.data(), static_cast<Eigen::Index>(o->q.size()));
        const auto g = hh::cone_geometry(q, o->r, o->m, o->M);
        double plus = std::numeric_limits<double>::infinity(), minus = plus;
        for (int i = 0; i < o->draws; ++i) {
            const auto rep = hh::verify_admissibility(g, hh::xi_sample(g, static_cast<std::uint64_t>(i)));
            plus = std::min(plus, rep.plus_margin);
            minus = std::min(minus, rep.minus_margin);
        }
        json j{{"theta", g.theta},         {"theta_plus", g.theta_plus}, {"theta_minus", g.theta_minus},
               {"phi_minus", g.phi_minus}, {"rV_plus", g.rV_plus},       {"rV_minus", g.rV_minus},
               {"admissibility", {{"draws", o->draws}, {"min_plus_margin", plus}, {"min_minus_margin", minus}}}};
        std::cout << j.dump(2) << '\n';
    };
    cmds.push_back(std::move(c));
}

// ---------------------------------------------------------------------------
// sim2d run | converge

struct SimOpts {
    std::string medium{"{\"dim\": 2, \"expr\": \"1\"}"};
    double Lx{3.0}, Ly{1.0}, eps{0.1}, psi0{1.0}, psi_rate{0.0}, h0{1.0}, h0_amplitude{0.0}, cfl{0.4}, T{1.0},
        save_interval{0.1};
    int nx{64}, ny{64}, jobs{1};
    std::optional<double> dt;

    void bind(Command& c) {
        c.bind.add_medium(c.app, medium);
        c.bind.add(c.app, "Lx", Lx, "strip depth");
        c.bind.add(c.app, "Ly", Ly, "tangential period");
        c.bind.add(c.app, "nx", nx, "grid cells across the strip");
        c.bind.add(c.app, "ny", ny, "grid cells along the strip");
        c.bind.add(c.app, "psi0", psi0, "boundary pressure at t = 0");
        c.bind.add(c.app, "psi-rate", psi_rate, "boundary pressure growth rate");
        c.bind.add(c.app, "h0", h0, "initial front depth");
        c.bind.add(c.app, "h0-amplitude", h0_amplitude, "cosine perturbation of the initial front");
        c.bind.add(c.app, "cfl", cfl, "CFL number");
        c.bind.add(c.app, "dt", dt, "fixed time step");
        c.bind.add(c.app, "T", T, "final time");
        c.bind.add(c.app, "save-interval", save_interval, "snapshot spacing");
    }

    hh::SimConfig config() const {
        hh::SimConfig s;
        s.domain = {Lx, Ly, nx, ny};
        s.medium = resolve_medium(medium);
        s.eps = eps;
        s.psi0 = psi0;
        s.psi_rate = psi_rate;
        s.h0 = h0;
        s.h0_amplitude = h0_amplitude;
        s.dt = dt;
        s.cfl = cfl;
        s.T = T;
        s.save_interval = save_interval;
        return s;
    }
};

void setup_sim2d(CLI::App& parent, std::vector<std::unique_ptr<Command>>& cmds) {
    {
        auto c = std::make_unique<Command>();
        c->app = parent.add_subcommand("run", "Simulate the strip problem");
        struct Opts : SimOpts {
            std::string out_dir{"sim2d_out"};
        };
        auto o = std::make_shared<Opts>();
        c->add_config();
        o->bind(*c);
        c->bind.add(c->app, "eps", o->eps, "oscillation scale");
        c->bind.add(c->app, "out-dir", o->out_dir, "directory for fronts.csv, summary.json, fronts.svg");
        c->run = [o] {
            const auto cfg = o->config();
            const auto res = hh::simulate(cfg);
            std::filesystem::create_directories(o->out_dir);
            const auto dir = std::filesystem::path(o->out_dir);
            {
                Output out((dir / "fronts.csv").string());
                out.os() << "t [time],y [length],h [length]\n";
                for (const auto& f : res.history)
                    for (int j = 0; j < cfg.domain.ny; ++j)
                        out.os() << num(f.t) << ',' << num(cfg.domain.y(j)) << ',' << num(f.h[static_cast<std::size_t>(j)]) << '\n';
            }
            json s{{"steps", res.steps},
                   {"T", cfg.T},
                   {"eps", cfg.eps},
                   {"final_mean_depth", std::accumulate(res.history.back().h.begin(), res.history.back().h.end(), 0.0) /
                                            cfg.domain.ny},
                   {"front_speed", res.history.size() >= 3 ? hh::measured_front_speed(res.history) : 0.0},
                   {"min_pressure", res.min_pressure},
                   {"max_pressure", res.max_pressure},
                   {"max_principle", res.max_principle},
                   {"monotone", res.monotone}};
            {
                Output out((dir / "summary.json").string());
                out.os() << s.dump(2) << '\n';
            }
            std::vector<std::vector<std::pair<double, double>>> lines;
            for (const auto& f : res.history) {
                std::vector<std::pair<double, double>> l;
                for (int j = 0; j < cfg.domain.ny; ++j) l.emplace_back(f.h[static_cast<std::size_t>(j)], cfg.domain.y(j));
                lines.push_back(std::move(l));
            }
            write_svg((dir / "fronts.svg").string(), lines, "x", "y");
        };
        cmds.push_back(std::move(c));
    }
    {
        auto c = std::make_unique<Command>();
        c->app = parent.add_subcommand("converge", "Hausdorff convergence study over eps");
        struct Opts : SimOpts {
            std::string eps_list{"0.2,0.1,0.05"}, out;
        };
        auto o = std::make_shared<Opts>();
        c->add_config();
        o->bind(*c);
        c->bind.add(c->app, "eps", o->eps_list, "comma-separated eps values");
        c->bind.add(c->app, "jobs", o->jobs, "concurrent simulations");
        c->bind.add(c->app, "out", o->out, "JSON output (stdout if omitted)");
        c->run = [o] {
            const auto rep = hh::convergence_study(o->config(), parse_list(o->eps_list), o->jobs);
            json j{{"eps", rep.eps}, {"front_speed", rep.front_speed}, {"pairs", json::array()},
                   {"monotone_decrease", rep.monotone_decrease()}};
            for (const auto& p : rep.pairs)
                j["pairs"].push_back({{"eps_a", p.eps_a}, {"eps_b", p.eps_b}, {"final_front", p.final_front},
                                      {"spacetime", p.spacetime}});
            Output out(o->out);
            out.os() << j.dump(2) << '\n';
        };
        cmds.push_back(std::move(c));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homogenization toolkit for Hele-Shaw type free boundary problems"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Command>> cmds;

    auto* medium = app.add_subcommand("medium", "Periodic media");
    setup_medium_check(*medium, cmds);
    auto* rq = app.add_subcommand("rq", "One-dimensional effective velocity");
    setup_rq(*rq, cmds);
    auto* ts = app.add_subcommand("timescale", "Lambert-W time rescalings");
    setup_timescale(*ts, cmds);
    auto* barrier = app.add_subcommand("barrier", "Explicit barrier checks");
    setup_barrier(*barrier, cmds);
    auto* geometry = app.add_subcommand("geometry", "Cone geometry");
    setup_geometry(*geometry, cmds);
    auto* sim = app.add_subcommand("sim2d", "Two-dimensional strip simulator");
    setup_sim2d(*sim, cmds);
    for (auto* group : {medium, rq, ts, barrier, geometry, sim}) group->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    for (auto& c : cmds) {
        if (!c->app->parsed()) continue;
        try {
            if (!c->config.empty()) c->bind.apply(c->config);
            c->run();
            return 0;
        } catch (const ValidationError& e) {
            fmt::print(std::cerr, "error: {}\n", e.what());
            return 1;
        } catch (const hh::ParseError& e) {
            fmt::print(std::cerr, "error: {}\n", e.what());
            return 1;
        } catch (const std::invalid_argument& e) {
            fmt::print(std::cerr, "error: {}\n", e.what());
            return 1;
        } catch (const std::domain_error& e) {
            fmt::print(std::cerr, "error: {}\n", e.what());
            return 1;
        } catch (const std::exception& e) {
            fmt::print(std::cerr, "numerical failure: {}\n", e.what());
            return 2;
        }
    }
    return 1;
}
