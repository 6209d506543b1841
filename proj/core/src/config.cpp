#include "mqcavity/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mqc {

using json = nlohmann::json;

namespace {

// Strict view of one JSON object: every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(where() + "must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double num(const std::string& key, double def)
    {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(name(key) + " must be a number");
        return v.get<double>();
    }

    std::optional<double> optNum(const std::string& key)
    {
        if (!take(key) || j_.at(key).is_null()) return std::nullopt;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(name(key) + " must be a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int def)
    {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(name(key) + " must be an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key, bool def)
    {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(name(key) + " must be true or false");
        return v.get<bool>();
    }

    std::string str(const std::string& key, const std::string& def)
    {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(name(key) + " must be a string");
        return v.get<std::string>();
    }

    const json* raw(const std::string& key)
    {
        if (!take(key)) return nullptr;
        return &j_.at(key);
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError("unknown field \"" + name(it.key()) + "\"");
    }

private:
    bool take(const std::string& key)
    {
        if (!j_.contains(key)) return false;
        used_.insert(key);
        return true;
    }
    std::string where() const { return path_.empty() ? "config " : path_ + " "; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void requirePositive(double v, const std::string& name)
{
    if (!(v > 0)) throw ConfigError(name + " must be > 0");
}

void requireNonNegative(double v, const std::string& name)
{
    if (!(v >= 0)) throw ConfigError(name + " must be >= 0");
}

SystemParams parseSystem(const json& j)
{
    Reader r(j, "system");
    SystemParams p;
    p.n_cavities = r.integer("n_cavities", p.n_cavities);
    p.fock_levels = r.integer("fock_levels", p.fock_levels);
    p.nu_f = r.num("nu_f", p.nu_f);
    p.g_f = r.num("g_f", p.g_f);
    p.g_q1f = r.num("g_q1f", p.g_q1f);
    p.g_q2f = r.num("g_q2f", p.g_q2f);
    p.nu_q1_idle = r.num("nu_q1_idle", p.nu_q1_idle);
    p.nu_q2_idle = r.num("nu_q2_idle", p.nu_q2_idle);
    p.kappa = r.num("kappa", p.kappa);
    p.gamma = r.num("gamma", p.gamma);
    p.gamma_phi = r.num("gamma_phi", p.gamma_phi);
    r.finish();
    p.validate();
    return p;
}

EvolveOptions parseSolver(const json& j)
{
    Reader r(j, "solver");
    EvolveOptions o;
    o.sample_dt = r.num("sample_dt", o.sample_dt);
    o.rtol = r.num("rtol", o.rtol);
    o.atol = r.num("atol", o.atol);
    o.max_step = r.num("max_step", o.max_step);
    r.finish();
    requirePositive(o.sample_dt, "solver.sample_dt");
    requirePositive(o.rtol, "solver.rtol");
    requirePositive(o.atol, "solver.atol");
    requirePositive(o.max_step, "solver.max_step");
    return o;
}

SweepSpec parseSweep(const json& j, const std::string& path)
{
    Reader r(j, path);
    SweepSpec s;
    s.parameter = r.str("parameter", "");
    if (s.parameter.empty()) throw ConfigError(path + ".parameter is required");
    s.min = r.num("min", s.min);
    s.max = r.num("max", s.max);
    s.npoints = r.integer("npoints", s.npoints);
    s.scale = r.str("scale", "linear");
    r.finish();
    s.validate();
    return s;
}

Segment parseSegment(const json& j, const std::string& path)
{
    Reader r(j, path);
    Segment s;
    s.t_start = r.num("t_start", 0.0);
    s.ramp_up = r.num("ramp_up", 0.0);
    s.hold = r.num("hold", 0.0);
    s.ramp_down = r.num("ramp_down", s.ramp_up);
    if (!r.has("target")) throw ConfigError(path + ".target is required");
    s.target = r.num("target", 0.0);
    s.shape = parseShape(r.str("shape", "linear"));
    r.finish();
    return s;
}

std::vector<Segment> parseSegments(const json& j, const std::string& path)
{
    if (!j.is_array()) throw ConfigError(path + " must be an array of segments");
    std::vector<Segment> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parseSegment(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

json sweepJson(const SweepSpec& s)
{
    return json{{"parameter", s.parameter}, {"min", s.min}, {"max", s.max}, {"npoints", s.npoints}, {"scale", s.scale}};
}

json segmentJson(const Segment& s)
{
    return json{{"t_start", s.t_start}, {"ramp_up", s.ramp_up},   {"hold", s.hold},
                {"ramp_down", s.ramp_down}, {"target", s.target}, {"shape", shapeName(s.shape)}};
}

Basis parseBasis(const std::string& s)
{
    if (s == "sector") return Basis::Sector;
    if (s == "full") return Basis::Full;
    throw ConfigError("basis must be \"sector\" or \"full\"");
}

std::string basisName(Basis b)
{
    return b == Basis::Sector ? "sector" : "full";
}

void parseRamseyOptions(Reader& r, RamseyOptions& o, bool with_nu_q2)
{
    if (with_nu_q2) o.nu_q2 = r.num("nu_q2", o.nu_q2);
    o.dt_ramp = r.num("dt_ramp", o.dt_ramp);
    o.t_hold = r.optNum("t_hold");
    o.nu_q1_top = r.optNum("nu_q1_top");
    o.top_margin_gf = r.num("top_margin_gf", o.top_margin_gf);
    o.t_pre = r.num("t_pre", o.t_pre);
    o.lead = r.num("lead", o.lead);
    o.q2_ramp = r.num("q2_ramp", o.q2_ramp);
    o.q2_shape = parseShape(r.str("q2_shape", shapeName(o.q2_shape)));
    o.t_post = r.num("t_post", o.t_post);
    o.f_art = r.num("f_art", o.f_art);
    const std::string method = r.str("method", "compose");
    if (method == "compose")
        o.method = RamseyMethod::Compose;
    else if (method == "direct")
        o.method = RamseyMethod::Direct;
    else
        throw ConfigError("options.method must be \"compose\" or \"direct\"");
    requireNonNegative(o.dt_ramp, "options.dt_ramp");
    requireNonNegative(o.t_pre, "options.t_pre");
    requireNonNegative(o.lead, "options.lead");
    requireNonNegative(o.q2_ramp, "options.q2_ramp");
    requireNonNegative(o.t_post, "options.t_post");
    requirePositive(o.nu_q2, "options.nu_q2");
}

json ramseyOptionsJson(const RamseyOptions& o, bool with_nu_q2)
{
    json j{{"dt_ramp", o.dt_ramp},
           {"t_hold", o.holdTime()},
           {"top_margin_gf", o.top_margin_gf},
           {"t_pre", o.t_pre},
           {"lead", o.lead},
           {"q2_ramp", o.q2_ramp},
           {"q2_shape", shapeName(o.q2_shape)},
           {"t_post", o.t_post},
           {"f_art", o.f_art},
           {"method", o.method == RamseyMethod::Compose ? "compose" : "direct"}};
    if (o.nu_q1_top) j["nu_q1_top"] = *o.nu_q1_top;
    if (with_nu_q2) j["nu_q2"] = o.nu_q2;
    return j;
}

// Sweeps the experiment accepts, by parameter name.
std::vector<std::string> allowedSweeps(const std::string& exp)
{
    if (exp == "spectrum") return {"g_f"};
    if (exp == "qubit-spectrum") return {"nu_q"};
    if (exp == "hold-sweep") return {"t_hold"};
    if (exp == "ramp-sweep" || exp == "contour") return {"ramp"};
    if (exp == "probe") return {"nu_probe"};
    if (exp == "ramsey") return {"tau"};
    if (exp == "stark") return {"nu_q2", "tau"};
    return {};
}

RunConfig fromJson(const json& root)
{
    Reader top(root, "");
    RunConfig c;
    c.experiment = top.str("experiment", "");
    if (std::find(kExperimentTags.begin(), kExperimentTags.end(), c.experiment) == kExperimentTags.end())
        throw ConfigError("experiment must be one of the known tags (got \"" + c.experiment + "\")");

    if (const json* s = top.raw("system")) c.system = parseSystem(*s);
    if (const json* s = top.raw("solver")) c.solver = parseSolver(*s);
    c.output = top.str("output", c.output);
    c.losses = top.boolean("losses", c.losses);
    c.threads = top.integer("threads", c.threads);
    if (c.threads < 1) throw ConfigError("threads must be >= 1");

    std::vector<SweepSpec> sweeps;
    if (const json* s = top.raw("sweep")) {
        if (s->is_array()) {
            for (std::size_t i = 0; i < s->size(); ++i)
                sweeps.push_back(parseSweep((*s)[i], "sweep[" + std::to_string(i) + "]"));
        } else {
            sweeps.push_back(parseSweep(*s, "sweep"));
        }
    }
    const auto allowed = allowedSweeps(c.experiment);
    std::set<std::string> seen;
    for (const auto& s : sweeps) {
        if (std::find(allowed.begin(), allowed.end(), s.parameter) == allowed.end())
            throw ConfigError("sweep parameter \"" + s.parameter + "\" is not used by " + c.experiment);
        if (!seen.insert(s.parameter).second) throw ConfigError("duplicate sweep parameter \"" + s.parameter + "\"");
    }
    auto sweepFor = [&](const std::string& name) -> std::optional<SweepSpec> {
        for (const auto& s : sweeps)
            if (s.parameter == name) return s;
        return std::nullopt;
    };

    const json empty = json::object();
    const json* opt_json = top.raw("options");
    Reader opt(opt_json ? *opt_json : empty, "options");
    const json* pulses = top.raw("pulses");
    if (pulses && c.experiment != "evolve") throw ConfigError("pulses are only used by the evolve experiment");
    top.finish();

    const std::string& e = c.experiment;
    if (e == "spectrum") {
        c.g_f_sweep = sweepFor("g_f");
    } else if (e == "qubit-spectrum") {
        if (auto s = sweepFor("nu_q")) c.nu_sweep = *s;
        const std::string mode = opt.str("mode", "both");
        if (mode == "both")
            c.qubit_mode = QubitSweepMode::Both;
        else if (mode == "q1")
            c.qubit_mode = QubitSweepMode::Q1;
        else
            throw ConfigError("options.mode must be \"both\" or \"q1\"");
    } else if (e == "iswap") {
        auto& o = c.iswap;
        o.t_offset1 = opt.num("t_offset1", o.t_offset1);
        o.t_offset2 = opt.num("t_offset2", o.t_offset2);
        const std::string timing = opt.str("timing", "literal");
        if (timing == "literal")
            o.timing = ISwapTiming::Literal;
        else if (timing == "eigenmode")
            o.timing = ISwapTiming::Eigenmode;
        else
            throw ConfigError("options.timing must be \"literal\" or \"eigenmode\"");
        o.mode_index = opt.integer("mode_index", o.mode_index);
        o.tail = opt.num("tail", o.tail);
        o.basis = parseBasis(opt.str("basis", "sector"));
        requireNonNegative(o.t_offset1, "options.t_offset1");
        requireNonNegative(o.t_offset2, "options.t_offset2");
        requireNonNegative(o.tail, "options.tail");
    } else if (e == "hold-sweep") {
        auto& o = c.hold;
        if (auto s = sweepFor("t_hold")) o.t_hold = *s;
        o.dt_ramp = opt.num("dt_ramp", o.dt_ramp);
        o.t_offset = opt.num("t_offset", o.t_offset);
        o.tail = opt.num("tail", o.tail);
        o.settle = opt.num("settle", o.settle);
        o.mode_index = opt.integer("mode_index", o.mode_index);
        o.shape = parseShape(opt.str("shape", shapeName(o.shape)));
        requireNonNegative(o.dt_ramp, "options.dt_ramp");
        requirePositive(o.settle, "options.settle");
        if (o.tail < o.settle) throw ConfigError("options.tail must be >= options.settle");
        if (o.t_hold.min < 0) throw ConfigError("t_hold sweep must be >= 0");
    } else if (e == "ramp-sweep" || e == "contour") {
        auto& o = c.ramp;
        if (e == "contour") {
            o.cavities = {1, 6};
            o.tail = 0.0;
        }
        if (auto s = sweepFor("ramp")) o.ramp = *s;
        if (const json* cv = opt.raw("cavities")) {
            if (!cv->is_array() || cv->empty()) throw ConfigError("options.cavities must be a non-empty array");
            o.cavities.clear();
            for (const auto& v : *cv) {
                if (!v.is_number_integer()) throw ConfigError("options.cavities must hold integers");
                int n = v.get<int>();
                if (n < 1 || n > 8) throw ConfigError("options.cavities entries must be in [1, 8]");
                o.cavities.push_back(n);
            }
        }
        o.period = opt.num("period", o.period);
        o.nu_top = opt.optNum("nu_top");
        o.top_margin = opt.num("top_margin", o.top_margin);
        o.tail = opt.num("tail", o.tail);
        o.split = opt.num("split", o.split);
        o.amp_short_to = opt.num("amp_short_to", o.amp_short_to);
        o.amp_long_from = opt.num("amp_long_from", o.amp_long_from);
        o.fmin = opt.num("fmin", o.fmin);
        o.load_threshold = opt.num("load_threshold", o.load_threshold);
        o.shape = parseShape(opt.str("shape", shapeName(o.shape)));
        requirePositive(o.period, "options.period");
        requireNonNegative(o.tail, "options.tail");
        if (o.ramp.min < 0 || 2 * o.ramp.max > o.period) throw ConfigError("ramp sweep must lie in [0, period/2]");
    } else if (e == "probe") {
        auto& o = c.probe;
        if (auto s = sweepFor("nu_probe")) o.nu = *s;
        o.omega_p = opt.num("omega_p", o.omega_p);
        o.duration = opt.num("duration", o.duration);
        requireNonNegative(o.omega_p, "options.omega_p");
        requirePositive(o.duration, "options.duration");
    } else if (e == "ramsey") {
        auto& o = c.ramsey;
        if (auto s = sweepFor("tau")) o.tau = *s;
        parseRamseyOptions(opt, o, true);
    } else if (e == "stark") {
        auto& o = c.stark;
        if (auto s = sweepFor("tau")) o.ramsey.tau = *s;
        if (auto s = sweepFor("nu_q2")) o.nu_q2 = *s;
        parseRamseyOptions(opt, o.ramsey, false);
        o.fmin = opt.num("fmin", o.fmin);
        requireNonNegative(o.fmin, "options.fmin");
    } else if (e == "evolve") {
        auto& o = c.evolve;
        o.initial = opt.str("initial", o.initial);
        o.basis = parseBasis(opt.str("basis", "sector"));
        c.solver.t1 = opt.num("t_end", 100.0);
        requirePositive(c.solver.t1, "options.t_end");
        if (const json* pj = opt.raw("probe")) {
            Reader pr(*pj, "options.probe");
            ProbeSpec ps;
            ps.omega_p = pr.num("omega_p", 0.0);
            ps.nu_probe = pr.num("nu_probe", c.system.nu_f);
            pr.finish();
            requireNonNegative(ps.omega_p, "options.probe.omega_p");
            o.probe = ps;
        }
        if (pulses) {
            Reader pr(*pulses, "pulses");
            if (const json* q = pr.raw("q1")) o.schedule.q1.segments = parseSegments(*q, "pulses.q1");
            if (const json* q = pr.raw("q2")) o.schedule.q2.segments = parseSegments(*q, "pulses.q2");
            pr.finish();
        }
    }
    opt.finish();
    c.resolve();
    return c;
}

} // namespace

void RunConfig::resolve()
{
    system.validate();
    iswap.solver = solver;
    iswap.with_losses = losses;
    hold.solver = solver;
    hold.with_losses = losses;
    hold.threads = threads;
    ramp.solver = solver;
    ramp.threads = threads;
    if (!ramp.nu_top) ramp.nu_top = ramp.top(system);
    probe.solver = solver;
    probe.threads = threads;
    for (RamseyOptions* r : {&ramsey, &stark.ramsey}) {
        r->solver = solver;
        r->with_losses = losses;
        r->threads = threads;
        if (!r->t_hold) r->t_hold = r->holdTime();
        if (!r->nu_q1_top) r->nu_q1_top = r->q1Top(system);
    }
    evolve.solver = solver;
    evolve.solver.t0 = 0.0;
    evolve.with_losses = losses;
    evolve.schedule.q1.base = system.nu_q1_idle;
    evolve.schedule.q2.base = system.nu_q2_idle;
    if (experiment == "evolve") {
        evolve.schedule.q1.validate();
        evolve.schedule.q2.validate();
        evolve.solver.validate();
    }
}

RunConfig parseConfig(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return fromJson(root);
}

RunConfig loadConfig(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parseConfig(ss.str());
}

std::string configToJson(const RunConfig& c, int indent)
{
    const auto& p = c.system;
    json j;
    j["experiment"] = c.experiment;
    j["system"] = json{{"n_cavities", p.n_cavities}, {"fock_levels", p.fock_levels}, {"nu_f", p.nu_f},
                       {"g_f", p.g_f},           {"g_q1f", p.g_q1f},             {"g_q2f", p.g_q2f},
                       {"nu_q1_idle", p.nu_q1_idle}, {"nu_q2_idle", p.nu_q2_idle}, {"kappa", p.kappa},
                       {"gamma", p.gamma},       {"gamma_phi", p.gamma_phi}};
    j["solver"] = json{{"sample_dt", c.solver.sample_dt},
                       {"rtol", c.solver.rtol},
                       {"atol", c.solver.atol},
                       {"max_step", c.solver.max_step}};
    j["output"] = c.output;
    j["losses"] = c.losses;
    j["threads"] = c.threads;

    json opt = json::object();
    json sweeps = json::array();
    const std::string& e = c.experiment;
    if (e == "spectrum") {
        if (c.g_f_sweep) sweeps.push_back(sweepJson(*c.g_f_sweep));
    } else if (e == "qubit-spectrum") {
        sweeps.push_back(sweepJson(c.nu_sweep));
        opt["mode"] = c.qubit_mode == QubitSweepMode::Both ? "both" : "q1";
    } else if (e == "iswap") {
        const auto& o = c.iswap;
        opt = json{{"t_offset1", o.t_offset1},
                   {"t_offset2", o.t_offset2},
                   {"timing", o.timing == ISwapTiming::Literal ? "literal" : "eigenmode"},
                   {"mode_index", o.mode_index},
                   {"tail", o.tail},
                   {"basis", basisName(o.basis)}};
    } else if (e == "hold-sweep") {
        const auto& o = c.hold;
        sweeps.push_back(sweepJson(o.t_hold));
        opt = json{{"dt_ramp", o.dt_ramp}, {"t_offset", o.t_offset},     {"tail", o.tail},
                   {"settle", o.settle},   {"mode_index", o.mode_index}, {"shape", shapeName(o.shape)}};
    } else if (e == "ramp-sweep" || e == "contour") {
        const auto& o = c.ramp;
        sweeps.push_back(sweepJson(o.ramp));
        opt = json{{"cavities", o.cavities},
                   {"period", o.period},
                   {"nu_top", o.top(c.system)},
                   {"top_margin", o.top_margin},
                   {"tail", o.tail},
                   {"split", o.split},
                   {"amp_short_to", o.amp_short_to},
                   {"amp_long_from", o.amp_long_from},
                   {"fmin", o.fmin},
                   {"load_threshold", o.load_threshold},
                   {"shape", shapeName(o.shape)}};
    } else if (e == "probe") {
        sweeps.push_back(sweepJson(c.probe.nu));
        opt = json{{"omega_p", c.probe.omega_p}, {"duration", c.probe.duration}};
    } else if (e == "ramsey") {
        sweeps.push_back(sweepJson(c.ramsey.tau));
        opt = ramseyOptionsJson(c.ramsey, true);
    } else if (e == "stark") {
        sweeps.push_back(sweepJson(c.stark.nu_q2));
        sweeps.push_back(sweepJson(c.stark.ramsey.tau));
        opt = ramseyOptionsJson(c.stark.ramsey, false);
        opt["fmin"] = c.stark.fmin;
    } else if (e == "evolve") {
        const auto& o = c.evolve;
        opt = json{{"initial", o.initial}, {"basis", basisName(o.basis)}, {"t_end", c.solver.t1}};
        if (o.probe) opt["probe"] = json{{"omega_p", o.probe->omega_p}, {"nu_probe", o.probe->nu_probe}};
        json pj = json::object();
        json q1 = json::array(), q2 = json::array();
        for (const auto& s : o.schedule.q1.segments) q1.push_back(segmentJson(s));
        for (const auto& s : o.schedule.q2.segments) q2.push_back(segmentJson(s));
        pj["q1"] = q1;
        pj["q2"] = q2;
        j["pulses"] = pj;
    }
    if (!opt.empty()) j["options"] = opt;
    if (!sweeps.empty()) j["sweep"] = sweeps;
    return j.dump(indent);
}

} // namespace mqc
