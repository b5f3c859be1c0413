#include "maslov/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "maslov/angles.hpp"
#include "maslov/twist.hpp"

namespace maslov {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    return doc;
}

void apply_override(Json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set expects key.path=value, got: " + assignment);
    }
    const std::string keypath = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(raw);
    } catch (...) {
        value = raw;  // plain string
    }
    Json* node = &config;
    std::size_t pos = 0;
    for (;;) {
        const auto dot = keypath.find('.', pos);
        const std::string key = keypath.substr(pos, dot - pos);
        if (key.empty()) throw ConfigError("--set: empty key in " + keypath);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

namespace {

double number_or(const Json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError("field must be numeric: " + key);
    return j.at(key).get<double>();
}

std::vector<TrigTerm> trig_terms_from(const Json& arr, int d,
                                      const std::string& what) {
    std::vector<TrigTerm> terms;
    for (const auto& t : arr) {
        TrigTerm term;
        if (!t.contains("mode") || !t.at("mode").is_array()) {
            throw ConfigError(what + ": each term needs an integer mode array");
        }
        for (const auto& m : t.at("mode")) term.mode.push_back(m.get<int>());
        if (static_cast<int>(term.mode.size()) != d) {
            throw ConfigError(what + ": mode length must equal d");
        }
        term.cos_coeff = number_or(t, "cos", 0.0);
        term.sin_coeff = number_or(t, "sin", 0.0);
        terms.push_back(std::move(term));
    }
    return terms;
}

Mat matrix_from(const Json& rows, const std::string& what) {
    if (!rows.is_array() || rows.empty()) {
        throw ConfigError(what + ": expected a matrix (array of rows)");
    }
    const int r = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows.at(0).size());
    Mat M(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows.at(i).size()) != c) {
            throw ConfigError(what + ": ragged matrix");
        }
        for (int j = 0; j < c; ++j) M(i, j) = rows.at(i).at(j).get<double>();
    }
    return M;
}

}  // namespace

ConformalSystem system_from_config(const Json& config) {
    if (!config.contains("system")) throw ConfigError("missing \"system\"");
    const Json& sys = config.at("system");
    if (sys.contains("builtin")) {
        const std::string name = sys.at("builtin").get<std::string>();
        const Json params = sys.value("params", Json::object());
        const double a = number_or(params, "rate", 0.0);
        const int d = static_cast<int>(number_or(params, "d", 1));
        if (name == "harmonic") return harmonic_system(d, a);
        if (name == "free") return free_system(d, a);
        if (name == "damped_pendulum") return damped_pendulum_system(a);
        if (name == "torus_coupled") {
            return torus_coupled_system(number_or(params, "eps", 0.5), a);
        }
        if (name == "linear") {
            if (!params.contains("S")) {
                throw ConfigError("linear builtin needs params.S (2d x 2d)");
            }
            return linear_system(matrix_from(params.at("S"), "linear.S"), a);
        }
        if (name == "discounted_tonelli") {
            if (!params.contains("potential")) {
                throw ConfigError(
                    "discounted_tonelli needs params.potential (trig terms)");
            }
            return discounted_tonelli_system(
                d, trig_terms_from(params.at("potential"), d, "potential"), a);
        }
        throw ConfigError("unknown builtin system: " + name);
    }
    if (sys.contains("hamiltonian")) {
        const Json& ham = sys.at("hamiltonian");
        const int d = static_cast<int>(number_or(ham, "d", 1));
        const double a = number_or(ham, "rate", 0.0);
        std::vector<bool> angular(static_cast<std::size_t>(d), false);
        if (ham.contains("topology")) {
            const auto& topo = ham.at("topology");
            if (static_cast<int>(topo.size()) != d) {
                throw ConfigError("hamiltonian.topology length must equal d");
            }
            for (int i = 0; i < d; ++i) {
                const std::string flag = topo.at(i).get<std::string>();
                if (flag == "angle") {
                    angular[static_cast<std::size_t>(i)] = true;
                } else if (flag != "line") {
                    throw ConfigError("topology entries must be angle|line");
                }
            }
        }
        if (!ham.contains("terms") || !ham.at("terms").is_array()) {
            throw ConfigError("hamiltonian needs a terms array");
        }
        struct Term {
            double coeff = 0.0;
            std::vector<int> q_powers, p_powers, mode;
            bool is_sin = false;
            bool has_trig = false;
        };
        std::vector<Term> terms;
        for (const auto& tj : ham.at("terms")) {
            Term t;
            if (!tj.contains("coeff")) throw ConfigError("term needs coeff");
            t.coeff = tj.at("coeff").get<double>();
            auto powers = [&](const char* key, std::vector<int>& out) {
                if (!tj.contains(key)) return;
                for (const auto& v : tj.at(key)) out.push_back(v.get<int>());
                if (static_cast<int>(out.size()) != d) {
                    throw ConfigError(std::string(key) + " length must equal d");
                }
            };
            powers("q_powers", t.q_powers);
            powers("p_powers", t.p_powers);
            if (tj.contains("mode")) {
                t.has_trig = true;
                for (const auto& v : tj.at("mode")) t.mode.push_back(v.get<int>());
                if (static_cast<int>(t.mode.size()) != d) {
                    throw ConfigError("term mode length must equal d");
                }
                t.is_sin = tj.value("fn", "cos") == std::string("sin");
            }
            terms.push_back(std::move(t));
        }
        auto fn = [terms, d](double, const Vec& q, const Vec& p) {
            double total = 0.0;
            for (const auto& t : terms) {
                double v = t.coeff;
                for (int i = 0; i < d; ++i) {
                    if (!t.q_powers.empty()) {
                        for (int k = 0; k < t.q_powers[static_cast<std::size_t>(i)];
                             ++k) {
                            v *= q(i);
                        }
                    }
                    if (!t.p_powers.empty()) {
                        for (int k = 0; k < t.p_powers[static_cast<std::size_t>(i)];
                             ++k) {
                            v *= p(i);
                        }
                    }
                }
                if (t.has_trig) {
                    double phase = 0.0;
                    for (int i = 0; i < d; ++i) phase += t.mode[static_cast<std::size_t>(i)] * q(i);
                    v *= t.is_sin ? std::sin(phase) : std::cos(phase);
                }
                total += v;
            }
            return total;
        };
        ConformalSystem out;
        out.d = d;
        out.H = std::make_shared<FiniteDiffHamiltonian>(fn);
        if (a != 0.0) out.rate = [a](double) { return a; };
        out.angular = std::move(angular);
        out.name = "custom";
        return out;
    }
    throw ConfigError("system needs either \"builtin\" or \"hamiltonian\"");
}

Tolerances tolerances_from_config(const Json& config) {
    Tolerances tols;
    if (!config.contains("tolerances")) return tols;
    const Json& t = config.at("tolerances");
    auto fetch = [&](const char* key, double& slot) {
        if (t.contains(key)) slot = t.at(key).get<double>();
    };
    fetch("rank_tol", tols.rank_tol);
    fetch("iso_tol", tols.iso_tol);
    fetch("sig_tol_rel", tols.sig_tol_rel);
    fetch("angle_tol", tols.angle_tol);
    fetch("unwrap_guard", tols.unwrap_guard);
    fetch("residual_tol", tols.residual_tol);
    fetch("time_tol_rel", tols.time_tol_rel);
    fetch("vel_tol", tols.vel_tol);
    fetch("conformal_tol", tols.conformal_tol);
    fetch("twist_margin_rel", tols.twist_margin_rel);
    fetch("h_fd", tols.h_fd);
    fetch("conv_tol", tols.conv_tol);
    fetch("escape_bound", tols.escape_bound);
    return tols;
}

Vec state_from_config(const Json& config, const ConformalSystem& sys) {
    if (!config.contains("initial") || !config.at("initial").contains("state")) {
        throw ConfigError("missing initial.state");
    }
    const auto& arr = config.at("initial").at("state");
    if (static_cast<int>(arr.size()) != 2 * sys.d) {
        throw ConfigError("initial.state must have length 2d");
    }
    Vec x(2 * sys.d);
    for (int i = 0; i < 2 * sys.d; ++i) x(i) = arr.at(i).get<double>();
    return x;
}

LagrangianFrame frame_from_config(const Json& config,
                                  const ConformalSystem& sys) {
    const Json init = config.value("initial", Json::object());
    const Json spec = init.value("frame", Json("zero-section-tangent"));
    if (spec.is_string()) {
        const std::string name = spec.get<std::string>();
        if (name == "zero-section-tangent" || name == "horizontal") {
            return LagrangianFrame::horizontal(sys.d);
        }
        if (name == "vertical") return LagrangianFrame::vertical(sys.d);
        throw ConfigError("unknown frame spec: " + name);
    }
    if (spec.is_object() && spec.contains("matrix")) {
        return LagrangianFrame::from_columns(
            matrix_from(spec.at("matrix"), "initial.frame.matrix"));
    }
    throw ConfigError("initial.frame must be a name or {\"matrix\": ...}");
}

int thread_budget() {
    if (const char* env = std::getenv("MASLOV_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

struct TimeSpec {
    double t0, t1, dt;
};

TimeSpec time_from_config(const Json& config) {
    if (!config.contains("time")) throw ConfigError("missing \"time\"");
    const Json& t = config.at("time");
    TimeSpec ts{number_or(t, "t0", 0.0), 0.0, 0.0};
    if (!t.contains("t1")) throw ConfigError("missing time.t1");
    ts.t1 = t.at("t1").get<double>();
    ts.dt = number_or(t, "dt", 1e-3);
    if (ts.dt <= 0.0) throw ConfigError("time.dt must be positive");
    if (!(ts.t1 > ts.t0)) throw ConfigError("time.t1 must exceed time.t0");
    return ts;
}

std::string output_path(const Json& config, const char* fallback) {
    const Json out = config.value("output", Json::object());
    return out.value("path", std::string(fallback));
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    return f;
}

void write_json_file(const std::string& path, const Json& doc) {
    auto f = open_output(path);
    f << doc.dump(2) << "\n";
}

}  // namespace

void cmd_index(const Json& config) {
    const ConformalSystem sys = system_from_config(config);
    const Tolerances tols = tolerances_from_config(config);
    const TimeSpec ts = time_from_config(config);
    const Vec x0 = state_from_config(config, sys);
    const LagrangianFrame L0 = frame_from_config(config, sys);
    const int stride = std::max(
        1, static_cast<int>(number_or(config.value("output", Json::object()),
                                      "stride", 1.0)));

    PathOptions opts;
    opts.tols = tols;
    FlowPathOptions fpo;
    fpo.dt = ts.dt;
    fpo.stride = stride;
    FlowPath fp(sys, x0, L0, ts.t0, ts.t1, fpo);
    const LagrangianPath path = fp.path();
    const auto lift = unwrap_arg_delta(path, opts);
    const double theta0 = lift.front().theta;

    const bool start_transverse =
        vertical_intersection_dim(L0, tols.rank_tol) == 0;
    const double sum0 = start_transverse ? angles(L0).sum() : 0.0;

    auto out = open_output(output_path(config, "index.csv"));
    out << "t,arg_delta_unwrapped,alpha_mi,mi_checkpoint,vert_dim,conformal_defect\n";
    const auto& traj = fp.trajectory();
    if (traj.conformal_warning) {
        std::fprintf(stderr,
                     "warning: conformal defect %.3e exceeds tolerance; "
                     "decrease dt\n",
                     traj.max_checked_defect);
    }
    for (int i = 0; i < path.samples(); ++i) {
        const double t = path.time(i);
        const double theta = lift_theta_at(lift, t);
        const double alpha = (theta - theta0) / (2.0 * kPi);
        const LagrangianFrame& frame = path.frame(i);
        const int vert = vertical_intersection_dim(frame, tols.rank_tol);
        std::string mi_cell;
        if (start_transverse && vert == 0) {
            const double boundary = (angles(frame).sum() - sum0) / kPi;
            const double mi_real = alpha - boundary;
            const long long mi = std::llround(mi_real);
            if (std::abs(mi_real - mi) < tols.residual_tol) {
                mi_cell = std::to_string(mi);
            }
        }
        const int gi = fp.grid_index(t);
        out << format_double(t) << ',' << format_double(theta) << ','
            << format_double(alpha) << ',' << mi_cell << ',' << vert << ','
            << format_double(traj.conformal_defect(gi)) << '\n';
    }
}

void cmd_asymptotic(const Json& config) {
    const ConformalSystem sys = system_from_config(config);
    const Tolerances tols = tolerances_from_config(config);
    const Vec x0 = state_from_config(config, sys);
    const LagrangianFrame L0 = frame_from_config(config, sys);
    const Json spec = config.value("asymptotic", Json::object());
    if (!spec.contains("horizons")) {
        throw ConfigError("missing asymptotic.horizons");
    }
    std::vector<double> horizons;
    for (const auto& h : spec.at("horizons")) horizons.push_back(h.get<double>());
    const double dt =
        config.contains("time") ? number_or(config.at("time"), "dt", 1e-3) : 1e-3;

    PathOptions opts;
    opts.tols = tols;
    const AsymptoticEstimate est =
        asymptotic_index(sys, x0, L0, horizons, dt, opts);

    Json doc;
    doc["rate"] = est.rate;
    doc["horizons"] = est.horizons;
    doc["partials"] = est.partials;
    doc["cauchy_gap"] = est.cauchy_gap;
    doc["converged"] = est.converged;
    write_json_file(output_path(config, "asymptotic.json"), doc);
}

void cmd_scan(const Json& config) {
    const ConformalSystem sys = system_from_config(config);
    const Tolerances tols = tolerances_from_config(config);
    const Json spec = config.value("scan", Json::object());
    const int n_points = static_cast<int>(number_or(spec, "n_points", 100));
    const double T = number_or(spec, "T", 100.0);
    const double dt =
        config.contains("time") ? number_or(config.at("time"), "dt", 1e-3) : 1e-3;

    GraphSpec graph;
    graph.c = Vec::Zero(sys.d);
    if (spec.contains("graph")) {
        const Json& g = spec.at("graph");
        if (g.contains("c")) {
            if (static_cast<int>(g.at("c").size()) != sys.d) {
                throw ConfigError("scan.graph.c must have length d");
            }
            for (int i = 0; i < sys.d; ++i) graph.c(i) = g.at("c").at(i).get<double>();
        }
        if (g.contains("modes")) {
            graph.modes = trig_terms_from(g.at("modes"), sys.d, "scan.graph.modes");
        }
    }

    PathOptions opts;
    opts.tols = tols;
    const ScanResult result =
        graph_scan(sys, graph, n_points, T, dt, thread_budget(), opts);

    const std::string csv_path = output_path(config, "scan.csv");
    auto out = open_output(csv_path);
    out << "point_index";
    for (int i = 0; i < sys.d; ++i) out << ",q" << i;
    for (int i = 0; i < sys.d; ++i) out << ",p" << i;
    out << ",min_mi,max_mi,skips\n";
    for (std::size_t k = 0; k < result.points.size(); ++k) {
        const ScanPoint& pt = result.points[k];
        out << k;
        const Vec shown = reduced_state(sys, pt.x0);
        for (int i = 0; i < 2 * sys.d; ++i) out << ',' << format_double(shown(i));
        if (pt.failed) {
            out << ",,," << pt.skips << '\n';
        } else {
            out << ',' << pt.min_mi << ',' << pt.max_mi << ',' << pt.skips << '\n';
        }
    }
    out.close();

    Json summary;
    summary["n_points"] = n_points;
    summary["T"] = T;
    summary["failures"] = result.failures;
    summary["bound_violations"] = result.bound_violations;
    if (result.best_index >= 0) {
        const ScanPoint& best = result.points[static_cast<std::size_t>(result.best_index)];
        summary["best"]["point_index"] = result.best_index;
        summary["best"]["state"] = std::vector<double>(
            best.x0.data(), best.x0.data() + best.x0.size());
        summary["best"]["min_mi"] = best.min_mi;
        summary["best"]["max_mi"] = best.max_mi;
        summary["best"]["bound"] = best.bound();
    }
    write_json_file(csv_path + ".summary.json", summary);
    std::printf("%s\n", summary.dump().c_str());
}

void cmd_twist(const Json& config) {
    const ConformalSystem sys = system_from_config(config);
    const Tolerances tols = tolerances_from_config(config);
    const Json spec = config.value("twist", Json::object());
    if (!spec.contains("lo") || !spec.contains("hi") || !spec.contains("grid")) {
        throw ConfigError("twist needs lo, hi and grid arrays over (q, p)");
    }
    TwistRegion region;
    const int n = 2 * sys.d;
    region.lo.resize(n);
    region.hi.resize(n);
    if (static_cast<int>(spec.at("lo").size()) != n ||
        static_cast<int>(spec.at("hi").size()) != n ||
        static_cast<int>(spec.at("grid").size()) != n) {
        throw ConfigError("twist.lo/hi/grid must have length 2d");
    }
    TwistGrid grid;
    for (int i = 0; i < n; ++i) {
        region.lo(i) = spec.at("lo").at(i).get<double>();
        region.hi(i) = spec.at("hi").at(i).get<double>();
        grid.points_per_dim.push_back(spec.at("grid").at(i).get<int>());
    }
    if (spec.contains("times")) {
        region.times.clear();
        for (const auto& t : spec.at("times")) region.times.push_back(t.get<double>());
    }

    const TwistCertificate cert = twist_certificate(sys, region, grid, tols);
    Json doc;
    doc["verdict"] = to_string(cert.verdict);
    doc["min_eig"] = cert.min_eig;
    doc["margin"] = cert.margin;
    doc["evaluated"] = cert.evaluated;
    doc["witnesses"] = Json::array();
    for (const auto& w : cert.witnesses) {
        Json jw;
        jw["t"] = w.t;
        jw["x"] = std::vector<double>(w.x.data(), w.x.data() + w.x.size());
        jw["min_eig"] = w.min_eig;
        doc["witnesses"].push_back(jw);
    }
    write_json_file(output_path(config, "twist.json"), doc);
}

}  // namespace maslov
