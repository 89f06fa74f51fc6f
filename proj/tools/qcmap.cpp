// qcmap: verification suites, orbit realization and rescaling probes.
//
//   qcmap verify {zorich|stretch|interp|spiral|bilipschitz} [--dim n] [--K k] [--L l]
//                [--alpha auto|value] [--grid g] [--samples m] [--tol t] [--seed s]
//                [--bound b] [--out report.json]
//   qcmap realize --target target.json [--kmax k] [--samples m] [--grid g] --out orbit.csv
//                 [--summary summary.json]
//   qcmap probe --map stretch|rotation|realized [--dim n] [--K k] [--target f.json]
//               [--kmax k] [--t t1,t2,...] [--grid g] --out probe.csv
//
// Exit status: 0 all checks pass, 1 some check failed, 2 usage or input error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qcmap/io.hpp"

namespace {

using namespace qcmap;

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct VerifyArgs {
    std::string suite;
    SuiteConfig cfg;
    std::string alpha = "auto";
    std::string out;
    double bound = 0.0;
};

int run_verify(VerifyArgs& a, CLI::App& cmd)
{
    if (a.alpha != "auto") {
        try {
            std::size_t used = 0;
            a.cfg.alpha = std::stod(a.alpha, &used);
            if (used != a.alpha.size())
                throw std::invalid_argument(a.alpha);
        } catch (const std::exception&) {
            throw error(errc::invalid_input, "--alpha must be auto or a number");
        }
    }
    if (cmd.count("--bound") > 0)
        a.cfg.bound = a.bound;
    if (a.cfg.grid != 0 && a.cfg.grid < 8)
        throw error(errc::invalid_input, "--grid must be at least 8");
    if (a.cfg.tol < 0.0)
        throw error(errc::invalid_input, "--tol must be positive");

    const SuiteReport rep = run_suite(a.suite, a.cfg);
    for (const Check& c : rep.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << rep.suite << ": " << c.name << "  worst " << c.worst_value << ' '
                  << to_string(c.relation) << ' ' << c.bound << '\n';
    for (const auto& [k, v] : rep.info)
        std::cout << "  " << k << " = " << v << '\n';
    if (!a.out.empty())
        write_text(a.out, to_json(rep).dump(2) + "\n");
    return rep.pass() ? exit_pass : exit_fail;
}

struct RealizeArgs {
    std::string target;
    int kmax = 5;
    int samples = 64;
    int grid = 33;
    std::string out;
    std::string summary;
};

std::ptrdiff_t piece_index(const RealizedMap& f, double lr)
{
    if (f.pieces.empty() || lr >= f.log_r_start)
        return -1;
    const auto it = std::partition_point(f.pieces.begin(), f.pieces.end(),
                                         [lr](const ShellPiece& p) { return p.log_r_in > lr; });
    return it - f.pieces.begin();
}

int run_realize(const RealizeArgs& a)
{
    if (a.samples < 1 || a.kmax < 1)
        throw error(errc::invalid_input, "--samples and --kmax must be positive");
    const TargetSet target = load_target(a.target);
    const std::vector<PathPlan> plans = plan_paths(target, a.kmax);
    const RealizedMap f = build_map(plans, BuildOptions{0.0, a.grid});
    const int n = f.n;

    const std::vector<double> lrs = orbit_log_radii(f, a.samples);
    const Vector e1 = basis_vector(n, 0);
    std::vector<double> rho(lrs.size());
    std::vector<Vector> gamma(lrs.size());
    for (std::size_t i = 0; i < lrs.size(); ++i) {
        rho[i] = mean_radius_normalized(f, lrs[i]);
        gamma[i] = eval_normalized(f, e1, lrs[i]) / rho[i];
    }
    std::ostringstream csv;
    csv << 't';
    for (int i = 1; i <= n; ++i)
        csv << ",y_" << i;
    csv << ",piece_index,rho\n";
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < lrs.size(); ++i) {
        const double t = std::exp(lrs[i]);
        csv << format_double(t);
        for (int j = 0; j < n; ++j)
            csv << ',' << format_double(gamma[i](j));
        csv << ',' << piece_index(f, lrs[i]) << ',' << format_double(t * rho[i]) << '\n';
        lo = std::min(lo, gamma[i].norm());
        hi = std::max(hi, gamma[i].norm());
    }
    write_text(a.out, csv.str());

    const std::vector<Checkpoint> cps = checkpoints(f);
    double worst_cp = 0.0;
    json cp_list = json::array();
    for (const Checkpoint& c : cps) {
        worst_cp = std::max(worst_cp, c.error);
        cp_list.push_back({{"log_r", c.log_r}, {"planned", to_json(c.planned)}, {"error", number(c.error)}});
    }

    const std::vector<Vector> x = sample_target(target, 2048);
    json table = json::array();
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const PathPlan& plan : plans) {
        std::size_t first = f.pieces.size();
        for (std::size_t i = 0; i < f.pieces.size(); ++i)
            if (f.pieces[i].plan_k == plan.k) {
                first = i;
                break;
            }
        std::vector<Vector> tail;
        if (first == f.pieces.size()) {
            tail.push_back(orbit_curve(f, {f.log_r_end()}).front());
        } else {
            for (std::size_t i = 0; i < lrs.size(); ++i)
                if (lrs[i] <= f.pieces[first].log_r_out)
                    tail.push_back(gamma[i]);
        }
        const double h = hausdorff_distance(tail, x);
        monotone = monotone && h <= prev + 1e-9;
        prev = h;
        table.push_back({{"k", plan.k}, {"hausdorff", number(h)}, {"bound", 2.0 / plan.k}});
    }
    json alphas = json::array();
    for (const auto& [k, cert] : f.alphas)
        alphas.push_back({{"K", k}, {"alpha", cert.alpha}, {"min_jacobian", cert.min_jacobian}});
    json log_radii = json::array();
    for (const ShellPiece& p : f.pieces)
        log_radii.push_back({{"log_r_out", p.log_r_out}, {"log_r_in", p.log_r_in}, {"kind", p.kind == PieceKind::spiral ? "spiral" : "interp"}});

    const double c_prime = std::max(hi, 1.0 / lo);
    const json summary{{"n", n},
                       {"first_k", plans.front().k},
                       {"k_max", a.kmax},
                       {"piece_count", f.pieces.size()},
                       {"checkpoint_max_error", number(worst_cp)},
                       {"checkpoints", cp_list},
                       {"hausdorff", table},
                       {"hausdorff_non_increasing", monotone},
                       {"annulus", {{"min_radius", number(lo)}, {"max_radius", number(hi)}, {"C_prime", number(c_prime)}}},
                       {"alphas", alphas},
                       {"pieces", log_radii}};
    const std::string summary_path = a.summary.empty() ? a.out + ".summary.json" : a.summary;
    write_text(summary_path, summary.dump(2) + "\n");

    std::cout << "pieces " << f.pieces.size() << ", checkpoint max error " << worst_cp << ", annulus [" << lo << ", "
              << hi << "]\n";
    for (const auto& row : table)
        std::cout << "  k = " << row["k"] << "  hausdorff " << row["hausdorff"] << '\n';
    return exit_pass;
}

struct ProbeArgs {
    std::string map = "stretch";
    int dim = 3;
    double k = 2.0;
    std::string target;
    int kmax = 5;
    std::string t_list;
    int grid = 5;
    std::string out;
};

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw error(errc::invalid_input, "bad number in --t list: " + item);
        }
    }
    return out;
}

int run_probe(const ProbeArgs& a)
{
    if (a.grid < 2)
        throw error(errc::invalid_input, "--grid must be at least 2");
    int n = a.dim;
    std::function<Vector(double, const Vector&)> ft;
    std::vector<double> ts;
    if (!a.t_list.empty())
        ts = parse_list(a.t_list);
    for (double t : ts)
        if (!(t > 0.0))
            throw error(errc::invalid_input, "probe scales must be positive");

    RealizedMap realized;
    if (a.map == "stretch") {
        const StretchSpec spec(a.k, Frame::identity(n));
        const double scale = std::pow(a.k, 1.0 / n);
        ft = [spec, scale](double t, const Vector& x) { return Vector(oriented_stretch(t * x, spec) / (t * scale)); };
    } else if (a.map == "rotation") {
        if (n < 2)
            throw error(errc::invalid_input, "--dim too small");
        const Matrix rot = planar_rotation(n, 0.9, 0, 1);
        ft = [rot](double t, const Vector& x) { return Vector(rot * (t * x) / t); };
    } else if (a.map == "realized") {
        if (a.target.empty())
            throw error(errc::invalid_input, "--map realized needs --target");
        const TargetSet target = load_target(a.target);
        realized = build_map(plan_paths(target, a.kmax));
        n = realized.n;
        ft = [&realized](double t, const Vector& x) { return rescaled_map(realized, t, x); };
        if (ts.empty()) {
            const double lo = realized.log_r_end();
            const double hi = realized.log_r_start;
            for (int i = 0; i < 8; ++i)
                ts.push_back(std::exp(hi + (lo - hi) * (i + 0.5) / 8.0));
        }
    } else {
        throw error(errc::invalid_input, "--map must be stretch, rotation or realized");
    }
    if (n < 3)
        throw error(errc::invalid_input, "--dim must be at least 3");
    if (ts.empty())
        ts = {1.0, 0.1, 0.01, 1e-3};

    const std::vector<Vector> xs = probe_grid(n, a.grid);

    std::ostringstream csv;
    csv << 't';
    for (int i = 1; i <= n; ++i)
        csv << ",x_" << i;
    for (int i = 1; i <= n; ++i)
        csv << ",y_" << i;
    csv << '\n';
    std::vector<std::vector<Vector>> slices;
    for (double t : ts) {
        std::vector<Vector> slice;
        for (const Vector& x : xs) {
            const Vector y = ft(t, x);
            slice.push_back(y);
            csv << format_double(t);
            for (int i = 0; i < n; ++i)
                csv << ',' << format_double(x(i));
            for (int i = 0; i < n; ++i)
                csv << ',' << format_double(y(i));
            csv << '\n';
        }
        slices.push_back(std::move(slice));
    }
    const double spread = max_slice_distance(slices);
    if (!a.out.empty())
        write_text(a.out, csv.str());
    std::cout << json{{"map", a.map}, {"slices", ts.size()}, {"points", xs.size()}, {"max_slice_distance", spread}}.dump()
              << '\n';
    return exit_pass;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qcmap: explicit quasiconformal maps through the Zorich transform"};
    app.require_subcommand(1);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", va.suite, "zorich | stretch | interp | spiral | bilipschitz")
        ->required()
        ->check(CLI::IsMember({"zorich", "stretch", "interp", "spiral", "bilipschitz"}));
    verify->add_option("--dim", va.cfg.n, "dimension n")->check(CLI::Range(3, 8));
    verify->add_option("--K", va.cfg.k, "stretch factor K");
    verify->add_option("--L", va.cfg.l, "inner stretch factor L");
    verify->add_option("--alpha", va.alpha, "spiral rate or auto");
    verify->add_option("--grid", va.cfg.grid, "grid points per axis");
    verify->add_option("--samples", va.cfg.samples, "random samples");
    verify->add_option("--tol", va.cfg.tol, "tolerance for the suite's error checks");
    verify->add_option("--seed", va.cfg.seed, "random seed");
    verify->add_option("--bound", va.bound, "replace the suite's headline bound");
    verify->add_option("--out", va.out, "report JSON path");

    RealizeArgs ra;
    auto* realize = app.add_subcommand("realize", "build the map for a target and sample its orbit");
    realize->add_option("--target", ra.target, "target JSON")->required();
    realize->add_option("--kmax", ra.kmax, "deepest plan index");
    realize->add_option("--samples", ra.samples, "orbit samples per shell");
    realize->add_option("--grid", ra.grid, "spiral-rate certification grid");
    realize->add_option("--out", ra.out, "orbit CSV path")->required();
    realize->add_option("--summary", ra.summary, "summary JSON path (default: <out>.summary.json)");

    ProbeArgs pa;
    auto* probe = app.add_subcommand("probe", "tabulate rescaled maps f_t over a grid");
    probe->add_option("--map", pa.map, "stretch | rotation | realized");
    probe->add_option("--dim", pa.dim, "dimension n");
    probe->add_option("--K", pa.k, "stretch factor");
    probe->add_option("--target", pa.target, "target JSON for --map realized");
    probe->add_option("--kmax", pa.kmax, "deepest plan index for --map realized");
    probe->add_option("--t", pa.t_list, "comma-separated scales");
    probe->add_option("--grid", pa.grid, "grid points per axis on [-1, 1]^n");
    probe->add_option("--out", pa.out, "probe CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_usage;
    }

    try {
        if (*verify)
            return run_verify(va, *verify);
        if (*realize)
            return run_realize(ra);
        if (*probe)
            return run_probe(pa);
    } catch (const error& e) {
        std::cerr << "qcmap: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
