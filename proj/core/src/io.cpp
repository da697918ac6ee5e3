#include "vimo/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vimo::io {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "cube I/O assumes a little-endian host");

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------- cube file

namespace {

template <class T>
void put(std::string& buf, std::size_t& pos, T v) {
    std::memcpy(buf.data() + pos, &v, sizeof v);
    pos += sizeof v;
}

template <class T>
T get(const std::string& buf, std::size_t& pos) {
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof v);
    pos += sizeof v;
    return v;
}

}  // namespace

void write_cube(std::ostream& out, const IFDataCube& cube, std::uint64_t config_hash) {
    cube.validate();
    const auto& c = cube.config;
    std::string header(kCubeHeaderBytes, '\0');
    std::size_t pos = 0;
    std::memcpy(header.data(), "VIMO", 4);
    pos = 4;
    put<std::uint32_t>(header, pos, kCubeVersion);
    put<std::uint32_t>(header, pos, c.n_frames);
    put<std::uint32_t>(header, pos, c.samples_per_chirp);
    put<double>(header, pos, c.frame_rate);
    put<double>(header, pos, c.f_min);
    put<double>(header, pos, c.bandwidth);
    put<double>(header, pos, c.chirp_duration);
    put<std::uint64_t>(header, pos, config_hash);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::vector<float> payload;
    payload.reserve(cube.samples.data().size() * 2);
    for (const Complex& z : cube.samples.data()) {
        payload.push_back(static_cast<float>(z.real()));
        payload.push_back(static_cast<float>(z.imag()));
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) throw std::runtime_error("failed to write IF cube");
}

CubeFile read_cube(std::istream& in) {
    std::string header(kCubeHeaderBytes, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header.size()));
    if (in.gcount() < 4 || std::memcmp(header.data(), "VIMO", 4) != 0) throw FormatError("not an IF cube (bad magic)");
    if (static_cast<std::size_t>(in.gcount()) != kCubeHeaderBytes) throw FormatError("IF cube header truncated");

    std::size_t pos = 4;
    const auto version = get<std::uint32_t>(header, pos);
    if (version != kCubeVersion) throw FormatError("unsupported IF cube version " + std::to_string(version));
    CubeFile f;
    auto& c = f.cube.config;
    c.n_frames = get<std::uint32_t>(header, pos);
    c.samples_per_chirp = get<std::uint32_t>(header, pos);
    c.frame_rate = get<double>(header, pos);
    c.f_min = get<double>(header, pos);
    c.bandwidth = get<double>(header, pos);
    c.chirp_duration = get<double>(header, pos);
    f.config_hash = get<std::uint64_t>(header, pos);
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw FormatError(std::string("IF cube header invalid: ") + e.what());
    }

    const std::size_t n = static_cast<std::size_t>(c.n_frames) * c.samples_per_chirp;
    std::vector<float> payload(2 * n);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != payload.size() * sizeof(float)) {
        std::ostringstream msg;
        msg << "IF cube truncated: expected " << payload.size() * sizeof(float) << " payload bytes, got "
            << in.gcount();
        throw FormatError(msg.str());
    }
    f.cube.samples = ComplexMatrix(c.n_frames, c.samples_per_chirp);
    auto& d = f.cube.samples.data();
    for (std::size_t i = 0; i < n; ++i) d[i] = Complex(payload[2 * i], payload[2 * i + 1]);
    f.cube.validate();
    return f;
}

void write_cube_file(const std::string& path, const IFDataCube& cube, std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_cube(out, cube, config_hash);
}

CubeFile read_cube_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return read_cube(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << contents;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// ------------------------------------------------------------- config parse

namespace {

const char* to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

const char* to_string(MotionSpec::Kind k) {
    switch (k) {
        case MotionSpec::Kind::Template: return "template";
        case MotionSpec::Kind::Sinusoid: return "sinusoid";
        case MotionSpec::Kind::Static: return "static";
    }
    return "template";
}

/// Strict view of one JSON object: every key read is recorded and finish()
/// rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string path, const std::string& source)
        : j_(j), path_(std::move(path)), source_(source) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& msg, const std::string& key = {}) const {
        std::string where = path_;
        if (!key.empty()) where += where.empty() ? key : "." + key;
        throw FormatError(source_ + ": " + (where.empty() ? std::string("<root>") : where) + ": " + msg);
    }

    const json* find(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        used_.insert(key);
        return &*it;
    }

    Reader child(const char* key, const json& v) const { return Reader(v, sub(key), source_); }
    std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void num(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail("expected a number", key);
            out = v->get<double>();
        }
    }

    template <class U>
    void uint(const char* key, U& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0))
                fail("expected a non-negative integer", key);
            const auto x = v->get<std::uint64_t>();
            if (x > static_cast<std::uint64_t>(std::numeric_limits<U>::max())) fail("integer out of range", key);
            out = static_cast<U>(x);
        }
    }

    void integer(const char* key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail("expected an integer", key);
            out = v->get<int>();
        }
    }

    void boolean(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail("expected true or false", key);
            out = v->get<bool>();
        }
    }

    bool string(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail("expected a string", key);
            out = v->get<std::string>();
            return true;
        }
        return false;
    }

    void band(const char* key, Band& out) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
                fail("expected [low, high] in Hz", key);
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    void numbers(const char* key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail("expected an array of numbers", key);
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) fail("expected an array of numbers", key);
                out.push_back(e.get<double>());
            }
        }
    }

    /// Converts a parse helper's DomainError into a keyed FormatError.
    template <class F>
    auto convert(const char* key, F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const DomainError& e) {
            fail(e.what(), key);
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail("unknown key", it.key());
    }

private:
    const json& j_;
    std::string path_;
    const std::string& source_;
    std::set<std::string> used_;
};

void read_params(Reader r, TemplateParams& p) {
    r.num("A_h", p.A_h);
    r.num("A_res", p.A_res);
    r.num("T_h", p.T_h);
    r.num("T_res", p.T_res);
    r.num("t_off_h", p.t_off_h);
    r.num("t_off_r", p.t_off_r);
    r.num("y_off_h", p.y_off_h);
    r.num("y_off_r", p.y_off_r);
    r.num("c", p.c);
    r.finish();
}

void read_geometry(Reader r, ChestGeometry& g) {
    r.num("width", g.width);
    r.integer("patches", g.patches);
    r.num("max_delay", g.max_delay);
    r.num("edge_gain", g.edge_gain);
    r.finish();
}

void read_radar(Reader r, RadarConfig& c) {
    r.num("f_min", c.f_min);
    r.num("bandwidth", c.bandwidth);
    r.num("chirp_duration", c.chirp_duration);
    r.uint("samples_per_chirp", c.samples_per_chirp);
    r.num("frame_rate", c.frame_rate);
    r.uint("n_frames", c.n_frames);
    r.finish();
}

void read_scene(Reader r, SceneConfig& s) {
    std::string kind;
    if (r.string("type", kind)) {
        if (kind == "chest") s.kind = SceneConfig::Kind::Chest;
        else if (kind == "points") s.kind = SceneConfig::Kind::Points;
        else r.fail("expected \"chest\" or \"points\"", "type");
    }
    r.num("distance", s.distance);
    if (const json* v = r.find("geometry")) read_geometry(r.child("geometry", *v), s.geometry);
    if (const json* v = r.find("scatterers")) {
        if (!v->is_array()) r.fail("expected an array", "scatterers");
        s.scatterers.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            ScatterPoint p;
            Reader sr = r.child(("scatterers[" + std::to_string(i) + "]").c_str(), (*v)[i]);
            sr.num("base_range", p.base_range);
            if (const json* a = sr.find("amplitude")) {
                if (a->is_number()) p.amplitude = Complex(a->get<double>(), 0.0);
                else if (a->is_array() && a->size() == 2 && (*a)[0].is_number() && (*a)[1].is_number())
                    p.amplitude = Complex((*a)[0].get<double>(), (*a)[1].get<double>());
                else sr.fail("expected a number or [re, im]", "amplitude");
            }
            sr.num("motion_gain", p.motion_gain);
            sr.num("motion_delay", p.motion_delay);
            sr.finish();
            s.scatterers.push_back(p);
        }
    }
    if (const json* v = r.find("truth")) read_params(r.child("truth", *v), s.truth);
    if (const json* v = r.find("motion")) {
        Reader m = r.child("motion", *v);
        std::string k;
        if (m.string("kind", k)) {
            if (k == "template") s.motion.kind = MotionSpec::Kind::Template;
            else if (k == "sinusoid") s.motion.kind = MotionSpec::Kind::Sinusoid;
            else if (k == "static") s.motion.kind = MotionSpec::Kind::Static;
            else m.fail("expected \"template\", \"sinusoid\" or \"static\"", "kind");
        }
        m.num("amplitude", s.motion.amplitude);
        m.num("frequency", s.motion.frequency);
        m.finish();
    }
    if (const json* v = r.find("rbm")) {
        Reader m = r.child("rbm", *v);
        std::string k;
        if (m.string("kind", k)) s.rbm.kind = m.convert("kind", [&] { return rbm_kind_from_string(k); });
        m.num("amplitude", s.rbm.amplitude);
        m.band("band", s.rbm.band);
        m.finish();
    }
    if (const json* v = r.find("snr_db")) {
        if (v->is_null()) s.snr_db.reset();
        else if (v->is_number()) s.snr_db = v->get<double>();
        else r.fail("expected a number or null", "snr_db");
    }
    r.finish();
}

void read_pipeline(Reader r, PipelineConfig& p) {
    r.boolean("clutter_removal", p.clutter_removal);
    std::string w;
    if (r.string("window", w)) {
        if (w == "rectangular") p.window = Window::Rectangular;
        else if (w == "hann") p.window = Window::Hann;
        else r.fail("expected \"rectangular\" or \"hann\"", "window");
    }
    if (const json* v = r.find("selection")) {
        Reader s = r.child("selection", *v);
        s.num("alpha", p.selection.alpha);
        s.num("th_resp", p.selection.th_resp);
        s.num("th_heart", p.selection.th_heart);
        s.band("resp_band", p.selection.resp_band);
        s.band("heart_band", p.selection.heart_band);
        s.integer("highpass_order", p.selection.highpass_order);
        s.finish();
    }
    if (const json* v = r.find("combine")) {
        Reader s = r.child("combine", *v);
        s.num("max_lag", p.combine.max_lag);
        s.finish();
    }
    if (const json* v = r.find("fit")) {
        Reader s = r.child("fit", *v);
        s.uint("coarse_points", p.fit.coarse_points);
        s.num("sse_tol", p.fit.sse_tol);
        s.uint("max_iters", p.fit.max_iters);
        s.num("initial_radius", p.fit.initial_radius);
        s.num("ac_threshold", p.fit.ac_threshold);
        if (const json* b = s.find("bounds")) {
            Reader br = s.child("bounds", *b);
            auto& B = p.fit.bounds;
            br.num("T_res_min", B.physio.T_res_min);
            br.num("T_res_max", B.physio.T_res_max);
            br.num("T_h_min", B.physio.T_h_min);
            br.num("T_h_max", B.physio.T_h_max);
            br.num("A_res_min", B.physio.A_res_min);
            br.num("A_res_max", B.physio.A_res_max);
            br.num("A_h_min", B.physio.A_h_min);
            br.num("A_h_max", B.physio.A_h_max);
            br.num("t_off_min", B.t_off_min);
            br.num("t_off_max", B.t_off_max);
            br.num("y_off_min", B.y_off_min);
            br.num("y_off_max", B.y_off_max);
            br.num("c_min", B.c_min);
            br.num("c_max", B.c_max);
            br.finish();
        }
        s.finish();
    }
    if (const json* v = r.find("baseline")) {
        Reader s = r.child("baseline", *v);
        s.band("resp_band", p.baseline.resp_band);
        s.band("heart_band", p.baseline.heart_band);
        s.integer("filter_order", p.baseline.filter_order);
        s.finish();
    }
    r.finish();
}

void read_ablation(Reader r, AblationGrid& g) {
    r.numbers("ranges", g.ranges);
    if (const json* v = r.find("rbm")) {
        if (!v->is_array()) r.fail("expected an array of strings", "rbm");
        g.rbm_kinds.clear();
        for (const auto& e : *v) {
            if (!e.is_string()) r.fail("expected an array of strings", "rbm");
            g.rbm_kinds.push_back(r.convert("rbm", [&] { return rbm_kind_from_string(e.get<std::string>()); }));
        }
    }
    r.num("sway_amplitude", g.sway_amplitude);
    r.num("shake_amplitude", g.shake_amplitude);
    r.uint("seeds_per_cell", g.seeds_per_cell);
    r.num("snr_db", g.snr_db);
    std::string t;
    if (r.string("truth", t)) {
        if (t == "randomized") g.truth = TruthMode::Randomized;
        else if (t == "fixed") g.truth = TruthMode::Fixed;
        else r.fail("expected \"randomized\" or \"fixed\"", "truth");
    }
    if (const json* v = r.find("fixed_truth")) read_params(r.child("fixed_truth", *v), g.fixed_truth);
    if (const json* v = r.find("geometry")) read_geometry(r.child("geometry", *v), g.geometry);
    if (const json* v = r.find("methods")) {
        if (!v->is_array()) r.fail("expected an array of strings", "methods");
        g.methods.clear();
        for (const auto& e : *v) {
            if (!e.is_string()) r.fail("expected an array of strings", "methods");
            g.methods.push_back(r.convert("methods", [&] { return method_from_string(e.get<std::string>()); }));
        }
    }
    r.finish();
}

// ------------------------------------------------------------- config dump

json params_json(const TemplateParams& p) {
    json j;
    const auto a = p.to_array();
    for (std::size_t i = 0; i < TemplateParams::kCount; ++i) j[TemplateParams::kNames[i]] = a[i];
    return j;
}

json band_json(const Band& b) { return json::array({b.low, b.high}); }

json geometry_json(const ChestGeometry& g) {
    return {{"width", g.width}, {"patches", g.patches}, {"max_delay", g.max_delay}, {"edge_gain", g.edge_gain}};
}

json config_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["method"] = to_string(cfg.method);
    const auto& rc = cfg.radar;
    j["radar"] = {{"f_min", rc.f_min},         {"bandwidth", rc.bandwidth},   {"chirp_duration", rc.chirp_duration},
                  {"samples_per_chirp", rc.samples_per_chirp}, {"frame_rate", rc.frame_rate}, {"n_frames", rc.n_frames}};

    const auto& s = cfg.scene;
    json scene;
    scene["type"] = s.kind == SceneConfig::Kind::Chest ? "chest" : "points";
    scene["distance"] = s.distance;
    scene["geometry"] = geometry_json(s.geometry);
    scene["scatterers"] = json::array();
    for (const auto& p : s.scatterers)
        scene["scatterers"].push_back({{"base_range", p.base_range},
                                       {"amplitude", json::array({p.amplitude.real(), p.amplitude.imag()})},
                                       {"motion_gain", p.motion_gain},
                                       {"motion_delay", p.motion_delay}});
    scene["truth"] = params_json(s.truth);
    scene["motion"] = {{"kind", to_string(s.motion.kind)}, {"amplitude", s.motion.amplitude}, {"frequency", s.motion.frequency}};
    scene["rbm"] = {{"kind", vimo::to_string(s.rbm.kind)}, {"amplitude", s.rbm.amplitude}, {"band", band_json(s.rbm.band)}};
    scene["snr_db"] = s.snr_db ? json(*s.snr_db) : json(nullptr);
    j["scene"] = scene;

    const auto& p = cfg.pipeline;
    const auto& B = p.fit.bounds;
    j["pipeline"] = {
        {"clutter_removal", p.clutter_removal},
        {"window", to_string(p.window)},
        {"selection",
         {{"alpha", p.selection.alpha},
          {"th_resp", p.selection.th_resp},
          {"th_heart", p.selection.th_heart},
          {"resp_band", band_json(p.selection.resp_band)},
          {"heart_band", band_json(p.selection.heart_band)},
          {"highpass_order", p.selection.highpass_order}}},
        {"combine", {{"max_lag", p.combine.max_lag}}},
        {"fit",
         {{"coarse_points", p.fit.coarse_points},
          {"sse_tol", p.fit.sse_tol},
          {"max_iters", p.fit.max_iters},
          {"initial_radius", p.fit.initial_radius},
          {"ac_threshold", p.fit.ac_threshold},
          {"bounds",
           {{"T_res_min", B.physio.T_res_min}, {"T_res_max", B.physio.T_res_max}, {"T_h_min", B.physio.T_h_min},
            {"T_h_max", B.physio.T_h_max},     {"A_res_min", B.physio.A_res_min}, {"A_res_max", B.physio.A_res_max},
            {"A_h_min", B.physio.A_h_min},     {"A_h_max", B.physio.A_h_max},     {"t_off_min", B.t_off_min},
            {"t_off_max", B.t_off_max},        {"y_off_min", B.y_off_min},        {"y_off_max", B.y_off_max},
            {"c_min", B.c_min},                {"c_max", B.c_max}}}}},
        {"baseline",
         {{"resp_band", band_json(p.baseline.resp_band)},
          {"heart_band", band_json(p.baseline.heart_band)},
          {"filter_order", p.baseline.filter_order}}}};

    const auto& g = cfg.ablation;
    json rbm = json::array();
    for (RbmKind k : g.rbm_kinds) rbm.push_back(vimo::to_string(k));
    json methods = json::array();
    for (Method m : g.methods) methods.push_back(to_string(m));
    j["ablation"] = {{"ranges", g.ranges},
                     {"rbm", rbm},
                     {"sway_amplitude", g.sway_amplitude},
                     {"shake_amplitude", g.shake_amplitude},
                     {"seeds_per_cell", g.seeds_per_cell},
                     {"snr_db", g.snr_db},
                     {"truth", g.truth == TruthMode::Fixed ? "fixed" : "randomized"},
                     {"fixed_truth", params_json(g.fixed_truth)},
                     {"geometry", geometry_json(g.geometry)},
                     {"methods", methods}};
    return j;
}

}  // namespace

void RunConfig::validate() const {
    radar.validate();
    if (scene.kind == SceneConfig::Kind::Points && scene.scatterers.empty())
        throw DomainError("points scene needs at least one scatterer");
    if (scene.snr_db && !std::isfinite(*scene.snr_db)) throw DomainError("scene snr_db must be finite or null");
    if (scene.kind == SceneConfig::Kind::Chest) {
        if (!(scene.distance > 0.0)) throw DomainError("scene distance must be > 0");
        if (scene.geometry.patches < 1) throw DomainError("chest geometry needs at least one patch");
    }
    pipeline.selection.validate();
    pipeline.fit.validate();
    ablation.validate();
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Byte offset to line:column.
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
        throw FormatError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }

    RunConfig cfg;
    Reader r(j, "", source);
    r.uint("seed", cfg.seed);
    std::string m;
    if (r.string("method", m)) cfg.method = r.convert("method", [&] { return method_from_string(m); });
    if (const json* v = r.find("radar")) read_radar(r.child("radar", *v), cfg.radar);
    if (const json* v = r.find("scene")) read_scene(r.child("scene", *v), cfg.scene);
    if (const json* v = r.find("pipeline")) read_pipeline(r.child("pipeline", *v), cfg.pipeline);
    if (const json* v = r.find("ablation")) read_ablation(r.child("ablation", *v), cfg.ablation);
    r.finish();
    cfg.ablation.master_seed = cfg.seed;
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw FormatError(source + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path), path); }

std::string canonical_json(const RunConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(canonical_json(cfg)); }

SceneSpec build_scene(const RunConfig& cfg) {
    SceneSpec scene;
    if (cfg.scene.kind == SceneConfig::Kind::Chest) {
        scene = make_chest_scene(cfg.scene.distance, cfg.scene.truth, cfg.scene.geometry);
    } else {
        scene.scatterers = cfg.scene.scatterers;
        scene.truth_params = cfg.scene.truth;
    }
    scene.motion = cfg.scene.motion;
    scene.rbm = cfg.scene.rbm;
    scene.noise_seed = derive_seed(cfg.seed, 1);
    scene.rbm.seed = derive_seed(cfg.seed, 2);
    return scene;
}

RadarConfig build_radar(const RunConfig& cfg, const SceneSpec& scene) {
    RadarConfig radar = cfg.radar;
    radar.noise_std = cfg.scene.snr_db ? noise_std_for_snr(scene, *cfg.scene.snr_db) : 0.0;
    return radar;
}

// ------------------------------------------------------------------ reports

namespace {

std::string num(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

ojson finite(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::string csv_header(std::uint64_t hash) { return "# config_hash=" + hash_hex(hash) + "\n"; }

ojson selection_json(const BinSelection& s) {
    ojson j;
    j["candidates"] = s.candidates;
    j["msp_bins"] = s.msp_bins;
    j["used_fallback"] = s.used_fallback();
    j["decisions"] = ojson::array();
    for (const auto& d : s.decisions)
        j["decisions"].push_back(ojson{{"bin", d.bin},
                                       {"detection", to_string(d.detection)},
                                       {"resp_ratio", finite(d.resp_ratio)},
                                       {"resp_peak_hz", finite(d.resp_peak_hz)},
                                       {"heart_ratio", finite(d.heart_ratio)},
                                       {"heart_peak_hz", finite(d.heart_peak_hz)}});
    return j;
}

ojson params_ojson(const TemplateParams& p) {
    ojson j;
    const auto a = p.to_array();
    for (std::size_t i = 0; i < TemplateParams::kCount; ++i) j[TemplateParams::kNames[i]] = finite(a[i]);
    return j;
}

}  // namespace

std::string truth_csv(const Simulation& sim, std::uint64_t hash) {
    std::string out = csv_header(hash) + "time_s,displacement_m,respiration_m,heartbeat_m\n";
    const auto& t = sim.truth;
    const auto& c = sim.truth_components;
    for (std::size_t m = 0; m < t.size(); ++m) {
        out += num(t.time(m)) + "," + num(t.values[m]) + "," + num(m < c.resp.size() ? c.resp[m] : kUndefined) + "," +
               num(m < c.heart.size() ? c.heart[m] : kUndefined) + "\n";
    }
    return out;
}

std::string truth_json(const RunConfig& cfg, const SceneSpec& scene, const Simulation& sim, std::uint64_t hash) {
    ojson j;
    j["config_hash"] = hash_hex(hash);
    const bool tmpl = scene.motion.kind == MotionSpec::Kind::Template;
    j["resp_bpm"] = tmpl ? finite(60.0 / scene.truth_params.T_res) : ojson(nullptr);
    j["heart_bpm"] = tmpl ? finite(60.0 / scene.truth_params.T_h) : ojson(nullptr);
    j["params"] = tmpl ? params_ojson(scene.truth_params) : ojson(nullptr);
    j["n_frames"] = sim.cube.config.n_frames;
    j["samples_per_chirp"] = sim.cube.config.samples_per_chirp;
    j["frame_rate"] = sim.cube.config.frame_rate;
    j["n_scatterers"] = scene.scatterers.size();
    j["occupied_bins"] = occupied_bins(scene, sim.cube.config);
    j["snr_db"] = cfg.scene.snr_db ? finite(*cfg.scene.snr_db) : ojson(nullptr);
    j["noise_std"] = sim.cube.config.noise_std;
    return dump(j);
}

std::string series_csv(const PipelineResult& r, std::uint64_t hash) {
    std::string out = csv_header(hash) + "time_s,displacement_m,respiration_m,heartbeat_m\n";
    const auto& d = r.displacement;
    auto at = [](const DisplacementSeries& s, std::size_t m) { return m < s.size() ? s.values[m] : kUndefined; };
    for (std::size_t m = 0; m < d.size(); ++m)
        out += num(d.time(m)) + "," + num(d.values[m]) + "," + num(at(r.resp_wave, m)) + "," + num(at(r.heart_wave, m)) +
               "\n";
    return out;
}

std::string result_json(const PipelineResult& r, const RunConfig& cfg, std::uint64_t hash) {
    ojson j;
    j["config_hash"] = hash_hex(hash);
    j["method"] = to_string(r.method);
    j["resp_bpm"] = finite(r.resp_bpm);
    j["heart_bpm"] = finite(r.heart_bpm);
    j["n_frames"] = r.displacement.size();
    j["start_time_s"] = r.displacement.start_time;
    j["selection"] = selection_json(r.selection);
    if (r.channel) {
        j["channel"] = {{"bins", r.channel->bins},
                        {"reference_bin", r.channel->reference_bin()},
                        {"delays_s", r.channel->delays},
                        {"correlations", r.channel->correlations}};
    }
    if (r.fit) {
        const auto& f = *r.fit;
        const Rates rates = extract_rates(f, cfg.pipeline.fit.bounds.physio);
        ojson fit;
        fit["params"] = params_ojson(f.params);
        fit["sse"] = finite(f.sse);
        fit["initial_sse"] = finite(f.initial_sse);
        fit["converged"] = f.converged;
        fit["termination"] = to_string(f.termination);
        fit["iterations"] = f.trace.size();
        fit["resp_at_bound"] = rates.resp_at_bound;
        fit["heart_at_bound"] = rates.heart_at_bound;
        j["fit"] = fit;
    }
    if (r.fft) {
        const double fs = r.displacement.frame_rate;
        const double res = r.displacement.size() ? fs / static_cast<double>(r.displacement.size()) : kUndefined;
        j["fft"] = {{"resp_hz", finite(r.fft->resp_hz)}, {"heart_hz", finite(r.fft->heart_hz)}, {"resolution_hz", finite(res)}};
    }
    j["warnings"] = r.warnings;
    return dump(j);
}

std::string trials_csv(const AblationReport& report, std::uint64_t hash) {
    std::string out = csv_header(hash) +
                      "range_m,rbm,method,trial,seed,resp_truth_bpm,heart_truth_bpm,resp_est_bpm,heart_est_bpm,"
                      "resp_error_pct,heart_error_pct,pcc_resp,pcc_heart,n_bins,error\n";
    for (const auto& t : report.trials) {
        std::string err = t.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out += num(t.range_m) + "," + vimo::to_string(t.rbm) + "," + to_string(t.method) + "," + std::to_string(t.trial) +
               "," + std::to_string(t.seed) + "," + num(t.resp_truth_bpm) + "," + num(t.heart_truth_bpm) + "," +
               num(t.resp_est_bpm) + "," + num(t.heart_est_bpm) + "," + num(t.resp_error_pct) + "," +
               num(t.heart_error_pct) + "," + num(t.pcc_resp) + "," + num(t.pcc_heart) + "," +
               std::to_string(t.n_bins) + "," + err + "\n";
    }
    return out;
}

std::string summary_json(const AblationReport& report, const RunConfig& cfg, std::uint64_t hash) {
    auto q = [](const Quantiles& x) {
        return ojson{{"min", finite(x.min)}, {"q1", finite(x.q1)}, {"median", finite(x.median)}, {"q3", finite(x.q3)},
                     {"max", finite(x.max)}};
    };
    ojson j;
    j["config_hash"] = hash_hex(hash);
    j["master_seed"] = cfg.seed;
    j["seeds_per_cell"] = cfg.ablation.seeds_per_cell;
    j["n_trials"] = report.trials.size();
    j["fft_resolution_hz"] = cfg.radar.frame_rate / static_cast<double>(cfg.radar.n_frames);
    j["cells"] = ojson::array();
    for (const auto& c : report.cells)
        j["cells"].push_back(ojson{{"range_m", c.range_m},
                                   {"rbm", vimo::to_string(c.rbm)},
                                   {"method", to_string(c.method)},
                                   {"n", c.n},
                                   {"failures", c.failures},
                                   {"mean_resp_error_pct", finite(c.mean_resp_error)},
                                   {"mean_heart_error_pct", finite(c.mean_heart_error)},
                                   {"median_pcc_resp", finite(c.median_pcc_resp)},
                                   {"resp_error_pct", q(c.resp_error)},
                                   {"heart_error_pct", q(c.heart_error)}});
    return dump(j);
}

std::string boxplot_csv(const AblationReport& report, std::uint64_t hash) {
    std::string out = csv_header(hash) + "range_m,rbm,method,metric,min,q1,median,q3,max\n";
    for (const auto& c : report.cells) {
        const std::string key = num(c.range_m) + "," + vimo::to_string(c.rbm) + "," + to_string(c.method) + ",";
        for (const auto& [metric, q] : {std::pair{"resp_error_pct", c.resp_error}, std::pair{"heart_error_pct", c.heart_error}})
            out += key + metric + "," + num(q.min) + "," + num(q.q1) + "," + num(q.median) + "," + num(q.q3) + "," +
                   num(q.max) + "\n";
    }
    return out;
}

}  // namespace vimo::io
