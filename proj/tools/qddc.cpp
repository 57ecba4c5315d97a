// qddc: data generation, synthesis, verification, simulation, minimal-rho
// bisection, gain sweeps and polytope pruning.
//
// Exit codes: 0 ok/feasible, 2 infeasible, 3 verification failure,
// 4 configuration error, 1 anything else.

#include "qddc/consistency.hpp"
#include "qddc/experiments.hpp"
#include "qddc/io.hpp"
#include "qddc/verify.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>
#include <string>

using namespace qddc;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 2;
constexpr int kUnverified = 3;
constexpr int kConfigError = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string system;
    std::string partition;
    std::string data;
    std::string cert;
    std::string method = "sign";
    std::string mode = "ss";
    std::string objective = "feasibility";
    std::string out;
    std::string x0;
    double rho = 1.0;
    double eta = 1e-6;
    double tol = 1e-4;
    double noise = 0.0;
    double grid_lo = 0.05;
    double grid_hi = 1.0;
    int points = 25;
    int samples = 100;
    int steps = 200;
    int parallel = 1;
    std::uint64_t seed = 1;
    bool unchecked = false;
    bool prune = false;
};

// Unreadable or malformed input files are configuration errors.
json load_json(const std::string& path) {
    try {
        return io::read_json(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

LinearSystem load_system(const std::string& s) {
    if (s == "sys1")
        return example_sys1();
    if (s == "sys2")
        return example_sys2();
    if (s.empty())
        throw ConfigError("--system is required");
    return io::system_from(load_json(s));
}

Partition load_partition(const std::string& p, const std::string& system) {
    if (p == "unit9" || (p.empty() && system == "sys1"))
        return example_partition1();
    if (p == "half26" || (p.empty() && system == "sys2"))
        return example_partition2();
    if (p.empty())
        throw ConfigError("--partition is required for a custom system");
    return io::partition_from(load_json(p));
}

struct LoadedData {
    Polytope P;
    Eigen::Index m = -1;  // input count when the file records it
};

/// A Dataset file (has "samples") or a Polytope file (has "G", optional "m").
LoadedData load_polytope(const std::string& path, bool prune) {
    if (path.empty())
        throw ConfigError("--data is required");
    const json j = load_json(path);
    LoadedData out;
    if (j.contains("samples")) {
        const Dataset d = io::dataset_from(j);
        if (d.empty())
            throw ConfigError(path + ": dataset has no samples");
        out.P = build_polytope(d);
        out.m = d.m();
    } else if (j.contains("G")) {
        out.P = io::polytope_from(j);
        out.m = j.value("m", Eigen::Index{-1});
    } else {
        throw ConfigError(path + ": neither a dataset nor a polytope");
    }
    if (prune)
        out.P = prune_redundant(out.P);
    return out;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        io::write_text(out, text);
}

SynthOptions synth_options(const Options& o) {
    SynthOptions s;
    s.mode = parse_mode(o.mode);
    s.eta = o.eta;
    if (o.objective == "feasibility")
        s.objective = Objective::Feasibility;
    else if (o.objective == "min-lambda")
        s.objective = Objective::MinimizeLambda;
    else
        throw ConfigError("unknown objective '" + o.objective + "' (expected feasibility or min-lambda)");
    if (!(o.eta >= 0.0))
        throw ConfigError("--eta must be nonnegative");
    return s;
}

/// Problem source for a method: the known plant for nominal, the data
/// polytope otherwise. Also returns the polytope used for verification.
ProblemSource make_source(const Options& o, Method method, Polytope& audit) {
    ProblemSource src;
    if (method == Method::Nominal) {
        src.sys = load_system(o.system);
        src.m = src.sys->m();
        audit = singleton_polytope(*src.sys);
    } else {
        const LoadedData data = load_polytope(o.data, o.prune);
        audit = data.P;
        src.polytope = audit;
        if (data.m >= 0)
            src.m = data.m;
        else if (!o.system.empty())
            src.m = load_system(o.system).m();
        else
            throw ConfigError("--system is required to fix the number of inputs");
    }
    return src;
}

void check_rho(double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw ConfigError("--rho must lie in (0, 1]");
}

int cmd_gendata(const Options& o) {
    const LinearSystem sys = load_system(o.system);
    const Partition part = load_partition(o.partition, o.system);
    if (o.samples < 0)
        throw ConfigError("-T must be nonnegative");
    ExcitationConfig ex;
    ex.noise = o.noise;
    const Dataset d = generate_dataset(sys, part, o.samples, o.seed, ex);
    json config = {{"system", o.system}, {"partition", io::to_json(part)}, {"T", o.samples}, {"noise", o.noise}};
    emit(o.out, io::to_json(d, config).dump(2) + "\n");
    std::cerr << "wrote " << d.size() << " samples\n";
    return kOk;
}

int cmd_synthesize(const Options& o) {
    check_rho(o.rho);
    const Method method = parse_method(o.method);
    Polytope audit;
    const ProblemSource src = make_source(o, method, audit);
    const MethodResult r = synthesize(method, src, o.rho, synth_options(o));
    if (!r.feasible()) {
        std::cerr << "synthesis " << to_string(r.status) << "\n";
        emit(o.out, io::to_json(r.cert).dump(2) + "\n");
        return kInfeasible;
    }
    const QuantizerSpec spec = QuantizerSpec::uniform(src.m, o.rho);
    const VerificationReport rep = robust_verify(audit, r.cert, spec, o.parallel);
    json j = io::to_json(r.cert);
    if (r.affine)
        io::add_affine(j, *r.affine);
    j["verification"] = io::to_json(rep);
    std::cerr << "lambda " << r.cert.lambda << ", verification " << (rep.verified ? "passed" : "FAILED")
              << " (worst margin " << rep.worst_margin << ")\n";
    if (!rep.verified && !o.unchecked) {
        std::cerr << "refusing to write an unverified certificate (use --unchecked to override)\n";
        return kUnverified;
    }
    emit(o.out, j.dump(2) + "\n");
    return rep.verified ? kOk : kUnverified;
}

int cmd_verify(const Options& o) {
    if (o.cert.empty())
        throw ConfigError("--cert is required");
    check_rho(o.rho);
    StabCertificate cert = io::certificate_from(load_json(o.cert));
    Polytope P;
    if (!o.data.empty())
        P = load_polytope(o.data, o.prune).P;
    else
        P = singleton_polytope(load_system(o.system));
    const QuantizerSpec spec = QuantizerSpec::uniform(cert.K.rows(), o.rho);
    const VerificationReport rep = robust_verify(P, cert.v, cert.S, spec, o.eta, o.parallel);
    emit(o.out, io::to_json(rep).dump(2) + "\n");
    return rep.verified ? kOk : kUnverified;
}

int cmd_simulate(const Options& o) {
    if (o.cert.empty())
        throw ConfigError("--cert is required");
    check_rho(o.rho);
    const LinearSystem sys = load_system(o.system);
    const StabCertificate cert = io::certificate_from(load_json(o.cert));
    Vector x0 = Vector::Ones(sys.n());
    if (!o.x0.empty()) {
        std::vector<double> vals;
        std::stringstream ss(o.x0);
        for (std::string tok; std::getline(ss, tok, ',');)
            vals.push_back(std::stod(tok));
        if (static_cast<Eigen::Index>(vals.size()) != sys.n())
            throw ConfigError("--x0 needs " + std::to_string(sys.n()) + " comma-separated values");
        x0 = Eigen::Map<Vector>(vals.data(), sys.n());
    }
    const Trajectory traj = simulate_quantized(sys, cert.K, QuantizerSpec::uniform(sys.m(), o.rho), x0, o.steps);
    emit(o.out, io::trajectory_csv(traj));
    const bool decays = !traj.diverged && decay_check(traj, cert.v, cert.lambda);
    std::cerr << "decay check " << (decays ? "passed" : "FAILED") << " (lambda " << cert.lambda << ")\n";
    return decays ? kOk : kUnverified;
}

int cmd_minrho(const Options& o) {
    const Method method = parse_method(o.method);
    Polytope audit;
    const ProblemSource src = make_source(o, method, audit);
    const MinRhoResult r = minimal_rho(method, src, synth_options(o), o.tol);
    if (r.numerical_failures > 0)
        std::cerr << r.numerical_failures << " probe(s) failed numerically twice and were counted infeasible\n";
    if (!r.rho) {
        emit(o.out, "none\n");
        return kInfeasible;
    }
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << *r.rho << "\n";
    emit(o.out, os.str());
    return kOk;
}

int cmd_sweep(const Options& o) {
    const Method method = parse_method(o.method);
    Polytope audit;
    const ProblemSource src = make_source(o, method, audit);
    const auto grid = log_grid(o.grid_lo, o.grid_hi, o.points);
    emit(o.out, sweep_csv(sweep(method, src, grid, synth_options(o), o.parallel)));
    return kOk;
}

int cmd_prune(const Options& o) {
    const LoadedData data = load_polytope(o.data, false);
    const Polytope Q = prune_redundant(data.P);
    std::cerr << "faces " << data.P.faces() << " -> " << Q.faces() << "\n";
    json j = io::to_json(Q);
    if (data.m >= 0)
        j["m"] = data.m;
    emit(o.out, j.dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantized data-driven superstabilization"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--system", o.system, "sys1 | sys2 | system JSON file");
        c->add_option("--data", o.data, "dataset or polytope JSON file");
        c->add_option("--method", o.method, "sign | aarc | nominal")->check(CLI::IsMember({"sign", "aarc", "nominal"}));
        c->add_option("--mode", o.mode, "ss | ess")->check(CLI::IsMember({"ss", "ess"}));
        c->add_option("--objective", o.objective, "feasibility | min-lambda");
        c->add_option("--rho", o.rho, "logarithmic quantizer density in (0, 1]");
        c->add_option("--eta", o.eta, "stability tolerance");
        c->add_option("--out", o.out, "output file (default stdout)");
        c->add_option("--parallel", o.parallel, "worker threads")->check(CLI::PositiveNumber);
        c->add_flag("--prune", o.prune, "remove redundant faces before solving");
    };

    auto* gen = app.add_subcommand("gendata", "generate an interval-quantized dataset");
    gen->add_option("--system", o.system, "sys1 | sys2 | system JSON file")->required();
    gen->add_option("--partition", o.partition, "unit9 | half26 | partition JSON file");
    gen->add_option("-T,--samples", o.samples, "number of transitions");
    gen->add_option("--seed", o.seed, "random seed");
    gen->add_option("--noise", o.noise, "process noise radius");
    gen->add_option("--out", o.out, "output file (default stdout)");

    auto* syn = app.add_subcommand("synthesize", "synthesize and verify a controller");
    common(syn);
    syn->add_flag("--unchecked", o.unchecked, "write the certificate even if verification fails");

    auto* ver = app.add_subcommand("verify", "robustly verify a certificate");
    common(ver);
    ver->add_option("--cert", o.cert, "certificate JSON file")->required();

    auto* sim = app.add_subcommand("simulate", "simulate the quantized closed loop");
    sim->add_option("--system", o.system, "sys1 | sys2 | system JSON file")->required();
    sim->add_option("--cert", o.cert, "certificate JSON file")->required();
    sim->add_option("--rho", o.rho, "logarithmic quantizer density in (0, 1]");
    sim->add_option("--x0", o.x0, "initial state, comma separated (default all ones)");
    sim->add_option("--steps", o.steps, "horizon");
    sim->add_option("--out", o.out, "CSV output (default stdout)");

    auto* mr = app.add_subcommand("minrho", "bisect the smallest feasible density");
    common(mr);
    mr->add_option("--tol", o.tol, "bisection tolerance");

    auto* sw = app.add_subcommand("sweep", "minimized gain over a log-spaced density grid");
    common(sw);
    sw->add_option("--grid-lo", o.grid_lo, "smallest density");
    sw->add_option("--grid-hi", o.grid_hi, "largest density");
    sw->add_option("--points", o.points, "grid points");

    auto* pr = app.add_subcommand("prune", "remove redundant faces of a data polytope");
    pr->add_option("--data", o.data, "dataset or polytope JSON file")->required();
    pr->add_option("--out", o.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*gen)
            return cmd_gendata(o);
        if (*syn)
            return cmd_synthesize(o);
        if (*ver)
            return cmd_verify(o);
        if (*sim)
            return cmd_simulate(o);
        if (*mr)
            return cmd_minrho(o);
        if (*sw)
            return cmd_sweep(o);
        if (*pr)
            return cmd_prune(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kConfigError;
}
