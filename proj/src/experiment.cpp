#include "robpen/experiment.hpp"

#include "robpen/errors.hpp"
#include "robpen/parallel.hpp"
#include "robpen/rng.hpp"
#include "robpen/verification.hpp"

#include <Eigen/Core>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#ifndef ROBPEN_VERSION
#define ROBPEN_VERSION "unknown"
#endif

namespace robpen {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

constexpr std::array<const char*, 7> kExperimentNames = {"bias_curve", "if_surface",      "sc_surface", "asv_curve",
                                                         "mse_curve",  "mse_convergence", "verify"};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        out.push_back(trim(item));
    return out;
}

double to_double(const std::string& s, const std::string& key)
{
    double v = 0.0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(key + ": not a finite number: '" + t + "'");
    return v;
}

long long to_integer(const std::string& s, const std::string& key)
{
    long long v = 0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key + ": not an integer: '" + t + "'");
    return v;
}

std::uint64_t to_seed(const std::string& s, const std::string& key)
{
    std::uint64_t v = 0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key + ": not an unsigned integer: '" + t + "'");
    return v;
}

// "lo:hi:points" or a comma separated list.
std::vector<double> to_grid(const std::string& s, const std::string& key)
{
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3)
            throw ConfigError(key + ": range must be lo:hi:points");
        const double lo = to_double(parts[0], key);
        const double hi = to_double(parts[1], key);
        const long long n = to_integer(parts[2], key);
        if (n < 1 || (n == 1 && lo != hi) || hi < lo)
            throw ConfigError(key + ": invalid range");
        for (long long i = 0; i < n; ++i)
            out.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
        if (n > 1)
            out.back() = hi;
        return out;
    }
    for (const auto& item : split(s, ','))
        out.push_back(to_double(item, key));
    if (out.empty())
        throw ConfigError(key + ": empty grid");
    return out;
}

using Allowed = std::map<std::string, std::set<std::string>>;

Allowed allowed_keys(ExperimentKind kind)
{
    Allowed a;
    a["experiment"] = {"type", "seed", "n_draws", "output"};
    a["model"] = {"beta0", "sigma"};
    a["functionals"] = {"names", "lambda", "scad_a", "huber_k", "biweight_c", "alpha"};
    for (auto k : kAllFunctionals)
        a["functionals"].insert(std::string("lambda_") + to_string(k));
    switch (kind) {
    case ExperimentKind::bias_curve:
        a["grid"] = {"beta0"};
        break;
    case ExperimentKind::if_surface:
        a["grid"] = {"contamination", "K"};
        break;
    case ExperimentKind::sc_surface:
        a["grid"] = {"contamination", "n"};
        a["experiment"].insert("scale_policy");
        break;
    case ExperimentKind::asv_curve:
        a["grid"] = {"lambda"};
        break;
    case ExperimentKind::mse_curve:
        a["grid"] = {"n"};
        break;
    case ExperimentKind::mse_convergence:
        a["grid"] = {"n"};
        a["experiment"].insert("replicates");
        break;
    case ExperimentKind::verify:
        a.erase("model");
        a.erase("functionals");
        a["experiment"].insert("criteria");
        break;
    }
    return a;
}

FunctionalSpec make_spec(FunctionalKind kind, const pt::ptree& sec)
{
    FunctionalSpec s = FunctionalSpec::of(kind, 0.0);
    const std::string own = std::string("lambda_") + to_string(kind);
    if (auto v = sec.get_optional<std::string>(own))
        s.lambda = to_double(*v, "functionals." + own);
    else if (auto g = sec.get_optional<std::string>("lambda"))
        s.lambda = to_double(*g, "functionals.lambda");
    else if (kind != FunctionalKind::least_squares)
        throw ConfigError("functionals.lambda: missing");
    if (kind == FunctionalKind::least_squares)
        s.lambda = 0.0;
    if (auto v = sec.get_optional<std::string>("scad_a"))
        s.a = to_double(*v, "functionals.scad_a");
    if (kind == FunctionalKind::huber_l1)
        if (auto v = sec.get_optional<std::string>("huber_k"))
            s.tuning = to_double(*v, "functionals.huber_k");
    if (kind == FunctionalKind::biweight_l1)
        if (auto v = sec.get_optional<std::string>("biweight_c"))
            s.tuning = to_double(*v, "functionals.biweight_c");
    if (auto v = sec.get_optional<std::string>("alpha"))
        s.alpha = to_double(*v, "functionals.alpha");
    return s;
}

std::vector<Index> to_sizes(const std::string& s, const std::string& key)
{
    std::vector<Index> out;
    for (const auto& item : split(s, ',')) {
        const long long n = to_integer(item, key);
        if (n < 10)
            throw ConfigError(key + ": sample sizes must be at least 10");
        out.push_back(static_cast<Index>(n));
    }
    if (out.empty())
        throw ConfigError(key + ": empty grid");
    return out;
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary);
    os << content;
    os.close();
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
}

struct CsvWriter {
    std::ostringstream os;
    explicit CsvWriter(const char* header) { os << header << '\n'; }
    void row(std::initializer_list<double> vals)
    {
        bool first = true;
        for (double v : vals) {
            if (!first)
                os << ',';
            os << csv_number(v);
            first = false;
        }
        os << '\n';
    }
};

constexpr const char* kCurveHeader = "param,value,stderr";
constexpr const char* kSurfaceHeader = "x0,y0,value";

class Runner {
public:
    Runner(const ExperimentConfig& cfg, const fs::path& dir) : cfg_(cfg), dir_(dir) {}

    void emit(const std::string& name, const CsvWriter& w)
    {
        write_file(dir_ / name, w.os.str());
        report.files.push_back(name);
    }

    MCConfig population() const { return {cfg_.n_draws, substream_seed(cfg_.seed, Stream::population, 0)}; }

    void bias_curve()
    {
        for (const auto& spec : cfg_.functionals) {
            CsvWriter w(kCurveHeader);
            for (double b : cfg_.beta0_grid) {
                const auto model = RegressionModel::simple(b, cfg_.sigma);
                const auto draws = DrawSet::generate(model, population());
                const auto fr = compute_functional(model, spec, draws);
                w.row({b, fr.bias(0), fr.std_error(0)});
            }
            emit(spec.name() + ".csv", w);
        }
    }

    std::vector<ContaminationPoint> grid() const
    {
        return contamination_grid(cfg_.contamination_lo, cfg_.contamination_hi, cfg_.contamination_points);
    }

    void if_surface()
    {
        const auto model = cfg_.model();
        const auto draws = DrawSet::generate(model, population());
        const auto g = grid();
        for (const auto& spec : cfg_.functionals) {
            const auto fr = compute_functional(model, spec, draws);
            const auto f = InfluenceFunction::prepare(model, spec, fr, draws);
            const auto s = robpen::if_surface(f, g, functional_id(model, spec));
            CsvWriter w(kSurfaceHeader);
            for (std::size_t i = 0; i < g.size(); ++i)
                w.row({g[i].x0(0), g[i].y0, s.values(static_cast<Index>(i), 0)});
            emit(spec.name() + ".csv", w);

            if (spec.kind != FunctionalKind::lasso || cfg_.k_grid.empty())
                continue;
            std::vector<std::vector<TanhLimitStep>> steps(g.size());
            parallel_blocks(g.size(), [&](std::size_t i) {
                steps[i] = if_lasso_tanh_limit(model, spec.lambda, g[i], cfg_.k_grid);
            });
            for (std::size_t k = 0; k < cfg_.k_grid.size(); ++k) {
                CsvWriter t(kSurfaceHeader);
                for (std::size_t i = 0; i < g.size(); ++i)
                    t.row({g[i].x0(0), g[i].y0, steps[i][k].value(0)});
                emit(spec.name() + "_tanh_K" + csv_number(cfg_.k_grid[k]) + ".csv", t);
            }
        }
    }

    void sc_surface()
    {
        const auto model = cfg_.model();
        const auto g = grid();
        for (std::size_t k = 0; k < cfg_.n_grid.size(); ++k) {
            const Index n = cfg_.n_grid[k];
            const Dataset base = sample(model, n, substream_seed(cfg_.seed, Stream::sensitivity_base, k));
            for (const auto& spec : cfg_.functionals) {
                FitOptions o;
                o.seed = substream_seed(cfg_.seed, Stream::elemental, k);
                const auto s = sensitivity_curve(base, spec, g, o, o.seed, cfg_.scale_policy);
                CsvWriter w(kSurfaceHeader);
                for (std::size_t i = 0; i < g.size(); ++i)
                    w.row({g[i].x0(0), g[i].y0, s.values(static_cast<Index>(i), 0)});
                emit(spec.name() + "_n" + std::to_string(n) + ".csv", w);
            }
        }
    }

    void asv_curve()
    {
        const auto model = cfg_.model();
        const auto draws = DrawSet::generate(model, population());
        for (const auto& base : cfg_.functionals) {
            CsvWriter w(kCurveHeader);
            for (double lambda : cfg_.lambda_grid) {
                FunctionalSpec spec = base;
                spec.lambda = lambda;
                const auto rep = asv(model, spec, draws);
                const double se = rep.mc_stderr.diagonal().norm();
                w.row({lambda, rep.asv.trace(), se});
            }
            emit(base.name() + ".csv", w);
        }
    }

    void mse_curve()
    {
        const auto model = cfg_.model();
        const auto draws = DrawSet::generate(model, population());
        for (const auto& spec : cfg_.functionals) {
            const auto rep = asv(model, spec, draws);
            CsvWriter w(kCurveHeader);
            for (Index n : cfg_.n_grid) {
                const auto m = mse(rep, model, n);
                w.row({static_cast<double>(n), m.mse, m.std_error});
            }
            emit(spec.name() + ".csv", w);
        }
    }

    void mse_convergence()
    {
        const auto model = cfg_.model();
        const auto draws = DrawSet::generate(model, population());
        for (const auto& spec : cfg_.functionals) {
            const auto rep = asv(model, spec, draws);
            CsvWriter emp(kCurveHeader);
            CsvWriter theory(kCurveHeader);
            for (std::size_t k = 0; k < cfg_.n_grid.size(); ++k) {
                const Index n = cfg_.n_grid[k];
                const double dn = static_cast<double>(n);
                const auto m = mse(rep, model, n);
                theory.row({dn, dn * m.mse, dn * m.std_error});
                FitOptions o;
                const auto h = mse_hat(model, spec, n, cfg_.replicates,
                                       substream_seed(cfg_.seed, Stream::replicate, k), o);
                emp.row({dn, dn * h.mse_hat, dn * h.std_error});
            }
            emit(spec.name() + ".csv", emp);
            emit(spec.name() + "_theory.csv", theory);
        }
    }

    void verify()
    {
        VerifyOptions o;
        o.seed = cfg_.seed;
        o.n_draws = cfg_.n_draws;
        std::ostringstream os;
        report.checks = run_checks(o, cfg_.criteria);
        for (const auto& c : report.checks) {
            os << format_line(c) << '\n';
            report.all_passed = report.all_passed && c.passed;
        }
        write_file(dir_ / "verify.txt", os.str());
        report.files.push_back("verify.txt");
    }

    RunReport report;

private:
    const ExperimentConfig& cfg_;
    fs::path dir_;
};

} // namespace

const char* to_string(ExperimentKind kind)
{
    return kExperimentNames[static_cast<std::size_t>(kind)];
}

ExperimentKind parse_experiment_kind(const std::string& name)
{
    for (std::size_t i = 0; i < kExperimentNames.size(); ++i)
        if (name == kExperimentNames[i])
            return static_cast<ExperimentKind>(i);
    throw ConfigError("experiment.type: unknown experiment '" + name + "'");
}

std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ExperimentConfig::validate() const
{
    if (n_draws < 100)
        throw ConfigError("experiment.n_draws: must be at least 100");
    if (experiment == ExperimentKind::verify) {
        for (int c : criteria)
            if (c < 1 || c > kCriterionCount)
                throw ConfigError("experiment.criteria: unknown criterion " + std::to_string(c));
        return;
    }
    if (beta0.size() < 1)
        throw ConfigError("model.beta0: empty");
    if (!(sigma > 0.0))
        throw ConfigError("model.sigma: must be positive");
    if (functionals.empty())
        throw ConfigError("functionals.names: empty");
    try {
        for (const auto& s : functionals)
            s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("functionals: ") + e.what());
    }
    switch (experiment) {
    case ExperimentKind::bias_curve:
        if (p() != 1)
            throw ConfigError("bias_curve needs simple regression (one beta0)");
        if (beta0_grid.empty())
            throw ConfigError("grid.beta0: missing");
        break;
    case ExperimentKind::if_surface:
    case ExperimentKind::sc_surface:
        if (p() != 1)
            throw ConfigError(std::string(to_string(experiment)) + " needs simple regression (one beta0)");
        if (contamination_points < 2)
            throw ConfigError("grid.contamination: at least 2 points");
        if (experiment == ExperimentKind::sc_surface && n_grid.empty())
            throw ConfigError("grid.n: missing");
        for (double k : k_grid)
            if (!(k > 0.0))
                throw ConfigError("grid.K: values must be positive");
        break;
    case ExperimentKind::asv_curve:
        if (lambda_grid.empty())
            throw ConfigError("grid.lambda: missing");
        for (double l : lambda_grid)
            if (l < 0.0)
                throw ConfigError("grid.lambda: values must be nonnegative");
        break;
    case ExperimentKind::mse_curve:
    case ExperimentKind::mse_convergence:
        if (n_grid.empty())
            throw ConfigError("grid.n: missing");
        if (replicates < 2)
            throw ConfigError("experiment.replicates: at least 2");
        break;
    case ExperimentKind::verify:
        break;
    }
    for (const auto& s : functionals)
        if (s.kind == FunctionalKind::sparse_lts && p() > 2 && experiment != ExperimentKind::sc_surface &&
            experiment != ExperimentKind::mse_convergence)
            throw ConfigError("sparse_lts population functional supports at most 2 coefficients");
}

ExperimentConfig parse_config(const std::string& text)
{
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.message() + " at line " + std::to_string(e.line()));
    }

    ExperimentConfig cfg;
    const auto exp = tree.get_child_optional("experiment");
    if (!exp)
        throw ConfigError("missing section [experiment]");
    const auto type = exp->get_optional<std::string>("type");
    if (!type)
        throw ConfigError("experiment.type: missing");
    cfg.experiment = parse_experiment_kind(trim(*type));

    const Allowed allowed = allowed_keys(cfg.experiment);
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw ConfigError("key outside a section: '" + section + "'");
        const auto it = allowed.find(section);
        if (it == allowed.end())
            throw ConfigError("unknown section [" + section + "] for experiment " + to_string(cfg.experiment));
        for (const auto& kv : body)
            if (!it->second.count(kv.first))
                throw ConfigError("unknown key " + section + "." + kv.first + " for experiment " +
                                  to_string(cfg.experiment));
    }

    if (auto v = exp->get_optional<std::string>("seed"))
        cfg.seed = to_seed(*v, "experiment.seed");
    if (auto v = exp->get_optional<std::string>("n_draws")) {
        const long long n = to_integer(*v, "experiment.n_draws");
        if (n < 100)
            throw ConfigError("experiment.n_draws: must be at least 100");
        cfg.n_draws = static_cast<std::size_t>(n);
    }
    if (auto v = exp->get_optional<std::string>("output"))
        cfg.output = trim(*v);
    if (auto v = exp->get_optional<std::string>("replicates"))
        cfg.replicates = static_cast<int>(to_integer(*v, "experiment.replicates"));
    if (auto v = exp->get_optional<std::string>("scale_policy")) {
        const auto s = trim(*v);
        if (s == "hold_base")
            cfg.scale_policy = ScalePolicy::hold_base;
        else if (s == "refit")
            cfg.scale_policy = ScalePolicy::refit;
        else
            throw ConfigError("experiment.scale_policy: expected hold_base or refit");
    }
    if (auto v = exp->get_optional<std::string>("criteria"))
        for (const auto& item : split(*v, ','))
            cfg.criteria.push_back(static_cast<int>(to_integer(item, "experiment.criteria")));

    if (cfg.experiment != ExperimentKind::verify) {
        const auto model = tree.get_child_optional("model");
        if (!model || !model->get_optional<std::string>("beta0"))
            throw ConfigError("model.beta0: missing");
        const auto b = to_grid(model->get<std::string>("beta0"), "model.beta0");
        cfg.beta0 = Eigen::Map<const VectorXd>(b.data(), static_cast<Index>(b.size()));
        if (auto v = model->get_optional<std::string>("sigma"))
            cfg.sigma = to_double(*v, "model.sigma");

        const auto fun = tree.get_child_optional("functionals");
        if (!fun || !fun->get_optional<std::string>("names"))
            throw ConfigError("functionals.names: missing");
        for (const auto& name : split(fun->get<std::string>("names"), ',')) {
            const auto kind = parse_functional_kind(name);
            for (const auto& s : cfg.functionals)
                if (s.kind == kind)
                    throw ConfigError("functionals.names: duplicate '" + name + "'");
            cfg.functionals.push_back(make_spec(kind, *fun));
        }
    }

    if (const auto grid = tree.get_child_optional("grid")) {
        if (auto v = grid->get_optional<std::string>("lambda"))
            cfg.lambda_grid = to_grid(*v, "grid.lambda");
        if (auto v = grid->get_optional<std::string>("beta0"))
            cfg.beta0_grid = to_grid(*v, "grid.beta0");
        if (auto v = grid->get_optional<std::string>("contamination")) {
            const auto parts = split(*v, ':');
            if (parts.size() != 3)
                throw ConfigError("grid.contamination: expected lo:hi:points");
            cfg.contamination_lo = to_double(parts[0], "grid.contamination");
            cfg.contamination_hi = to_double(parts[1], "grid.contamination");
            cfg.contamination_points = static_cast<int>(to_integer(parts[2], "grid.contamination"));
            if (!(cfg.contamination_hi > cfg.contamination_lo))
                throw ConfigError("grid.contamination: hi must exceed lo");
        }
        if (auto v = grid->get_optional<std::string>("n"))
            cfg.n_grid = to_sizes(*v, "grid.n");
        if (auto v = grid->get_optional<std::string>("K"))
            cfg.k_grid = to_grid(*v, "grid.K");
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

RunReport run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, const std::string& config_path)
{
    cfg.validate();
    if (out_dir.empty())
        throw ConfigError("no output directory given");
    if (fs::exists(out_dir) && !(fs::is_directory(out_dir) && fs::is_empty(out_dir)))
        throw ConfigError("output directory exists and is not empty: " + out_dir.string());

    const auto start = std::chrono::steady_clock::now();
    const fs::path target = fs::absolute(out_dir);
    const fs::path parent = target.parent_path();
    fs::create_directories(parent);
    const fs::path tmp = parent / ("." + target.filename().string() + ".tmp-" + std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directory(tmp);

    try {
        Runner r(cfg, tmp);
        switch (cfg.experiment) {
        case ExperimentKind::bias_curve: r.bias_curve(); break;
        case ExperimentKind::if_surface: r.if_surface(); break;
        case ExperimentKind::sc_surface: r.sc_surface(); break;
        case ExperimentKind::asv_curve: r.asv_curve(); break;
        case ExperimentKind::mse_curve: r.mse_curve(); break;
        case ExperimentKind::mse_convergence: r.mse_convergence(); break;
        case ExperimentKind::verify: r.verify(); break;
        }
        RunReport report = std::move(r.report);
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::ostringstream m;
        m << "experiment=" << to_string(cfg.experiment) << '\n';
        m << "config=" << config_path << '\n';
        m << "seed=" << cfg.seed << '\n';
        m << "n_draws=" << cfg.n_draws << '\n';
        m << "substreams=population:" << static_cast<int>(Stream::population)
          << " sample_base:" << static_cast<int>(Stream::sensitivity_base)
          << " replicate:" << static_cast<int>(Stream::replicate)
          << " elemental:" << static_cast<int>(Stream::elemental) << '\n';
        m << "threads=" << thread_count() << '\n';
        m << "robpen_version=" << ROBPEN_VERSION << '\n';
        m << "eigen_version=" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
          << '\n';
        m << "boost_version=" << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.'
          << BOOST_VERSION % 100 << '\n';
        m << "compiler=" << __VERSION__ << '\n';
        m << "files=";
        for (std::size_t i = 0; i < report.files.size(); ++i)
            m << (i ? ";" : "") << report.files[i];
        m << '\n';
        if (cfg.experiment == ExperimentKind::verify)
            m << "all_passed=" << (report.all_passed ? "true" : "false") << '\n';
        char wall[32];
        std::snprintf(wall, sizeof wall, "%.3f", report.seconds);
        m << "wall_time_seconds=" << wall << '\n';
        write_file(tmp / "manifest.txt", m.str());

        if (fs::exists(target))
            fs::remove(target);
        fs::rename(tmp, target);
        return report;
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }
}

} // namespace robpen
