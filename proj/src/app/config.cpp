#include "fmadj/app/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fmadj/app/presets.hpp"

namespace fmadj::app {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    const YAML::Mark m = n.Mark();
    if (!m.is_null()) os << ":" << m.line + 1 << ":" << m.column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& n, const std::string& ctx) const {
    if (!n.IsMap()) fail(n, ctx + " must be a mapping");
  }

  void allow(const YAML::Node& n, const std::string& ctx, std::initializer_list<const char*> keys) const {
    require_map(n, ctx);
    for (const auto& kv : n) {
      const std::string k = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        std::string known;
        for (const char* a : keys) known += std::string(known.empty() ? "" : ", ") + a;
        fail(kv.first, "unknown key '" + k + "' in " + ctx + " (expected one of: " + known + ")");
      }
    }
  }

  template <class T>
  T as(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "cannot read " + what);
    }
  }

  template <class T>
  void get(const YAML::Node& parent, const char* key, T& out) const {
    if (const YAML::Node n = parent[key]) out = as<T>(n, std::string("'") + key + "'");
  }

  Vec2 vec2(const YAML::Node& n, const std::string& what) const {
    if (!n.IsSequence() || n.size() != 2) fail(n, what + " must be a 2-element list");
    return {as<double>(n[0], what), as<double>(n[1], what)};
  }

  void get_vec2(const YAML::Node& parent, const char* key, Vec2& out) const {
    if (const YAML::Node n = parent[key]) out = vec2(n, std::string("'") + key + "'");
  }

  std::vector<Vec2> vec2_list(const YAML::Node& n, const std::string& what) const {
    if (!n.IsSequence()) fail(n, what + " must be a list");
    std::vector<Vec2> out;
    for (const auto& e : n) out.push_back(vec2(e, what + " entry"));
    return out;
  }

  std::vector<BlobCfg> blobs(const YAML::Node& n) const {
    if (!n.IsSequence()) fail(n, "'blobs' must be a list");
    std::vector<BlobCfg> out;
    for (const auto& e : n) {
      allow(e, "blob", {"center", "strength", "radius"});
      BlobCfg b;
      get_vec2(e, "center", b.center);
      get(e, "strength", b.strength);
      get(e, "radius", b.radius);
      out.push_back(b);
    }
    return out;
  }

  void shape(const YAML::Node& n, ShapeCfg& s, const std::string& ctx) const {
    allow(n, ctx, {"type", "center", "size", "edge", "path"});
    get(n, "type", s.type);
    get_vec2(n, "center", s.center);
    get(n, "size", s.size);
    get(n, "edge", s.edge);
    get(n, "path", s.path);
    static const std::set<std::string> types{"none", "disk", "square", "snapshot"};
    if (!types.count(s.type)) fail(n["type"], "unknown shape type '" + s.type + "'");
  }

  void velocity_target(const YAML::Node& n, VelocityTargetCfg& t) const {
    allow(n, "velocity target", {"type", "path", "amplitude", "viscosity", "blobs"});
    get(n, "type", t.type);
    get(n, "path", t.path);
    get(n, "amplitude", t.amplitude);
    if (const YAML::Node v = n["viscosity"]) t.viscosity = as<double>(v, "'viscosity'");
    if (const YAML::Node b = n["blobs"]) t.blobs = blobs(b);
    static const std::set<std::string> types{"none", "zero", "snapshot", "taylor-green", "simulate"};
    if (!types.count(t.type)) fail(n["type"], "unknown velocity target type '" + t.type + "'");
  }

  void read(const YAML::Node& root, RunConfig& c) const {
    if (root.IsNull()) return;
    allow(root, "config",
          {"preset", "grid", "sim", "poisson", "init", "objective", "params", "optimizer", "adjoint_check",
           "grad_check", "output", "seed"});
    get(root, "preset", c.preset);
    get(root, "seed", c.seed);
    if (const YAML::Node g = root["grid"]) {
      allow(g, "grid", {"nx", "ny", "dx", "width", "origin"});
      get(g, "nx", c.nx);
      get(g, "ny", c.ny);
      get(g, "dx", c.dx);
      get(g, "width", c.width);
      get_vec2(g, "origin", c.origin);
    }
    if (const YAML::Node s = root["sim"]) {
      allow(s, "sim",
            {"dt", "cfl", "steps", "n_long", "n_short", "viscosity", "mode", "bfecc", "midpoint_memory", "spill_dir"});
      get(s, "dt", c.dt);
      get(s, "cfl", c.cfl);
      get(s, "steps", c.steps);
      get(s, "n_long", c.n_long);
      get(s, "n_short", c.n_short);
      get(s, "viscosity", c.viscosity);
      get(s, "mode", c.mode);
      get(s, "bfecc", c.bfecc);
      get(s, "midpoint_memory", c.midpoint_memory);
      get(s, "spill_dir", c.spill_dir);
    }
    if (const YAML::Node p = root["poisson"]) {
      allow(p, "poisson", {"tolerance", "max_iterations", "mg_levels", "pre_sweeps", "post_sweeps"});
      get(p, "tolerance", c.poisson.tolerance);
      get(p, "max_iterations", c.poisson.max_iterations);
      get(p, "mg_levels", c.poisson.mg_levels);
      get(p, "pre_sweeps", c.poisson.pre_sweeps);
      get(p, "post_sweeps", c.poisson.post_sweeps);
    }
    if (const YAML::Node in = root["init"]) {
      allow(in, "init", {"velocity", "smoke"});
      if (const YAML::Node v = in["velocity"]) {
        allow(v, "init.velocity", {"type", "blobs", "amplitude", "path"});
        get(v, "type", c.init_u.type);
        get(v, "amplitude", c.init_u.amplitude);
        get(v, "path", c.init_u.path);
        if (const YAML::Node b = v["blobs"]) c.init_u.blobs = blobs(b);
        static const std::set<std::string> types{"zero", "blobs", "taylor-green", "snapshot"};
        if (!types.count(c.init_u.type)) fail(v["type"], "unknown velocity init type '" + c.init_u.type + "'");
      }
      if (const YAML::Node s = in["smoke"]) shape(s, c.init_xi, "init.smoke");
    }
    if (const YAML::Node o = root["objective"]) {
      if (!o.IsSequence()) fail(o, "'objective' must be a list of terms");
      c.terms.clear();
      for (const auto& e : o) {
        allow(e, "objective term", {"kind", "steps", "weight", "target"});
        TermCfg t;
        get(e, "kind", t.kind);
        try {
          term_kind_from_string(t.kind);
        } catch (const std::invalid_argument& ex) {
          fail(e["kind"] ? e["kind"] : e, ex.what());
        }
        if (const YAML::Node st = e["steps"]) {
          if (st.IsScalar()) {
            t.steps = {as<int>(st, "'steps'")};
          } else {
            t.steps = as<std::vector<int>>(st, "'steps'");
          }
        }
        get(e, "weight", t.weight);
        if (const YAML::Node tg = e["target"]) {
          if (t.kind == "keyframe-passive") {
            shape(tg, t.target_xi, "passive target");
          } else {
            velocity_target(tg, t.target_u);
          }
        }
        c.terms.push_back(std::move(t));
      }
    }
    if (const YAML::Node p = root["params"]) {
      allow(p, "params", {"wind", "blobs", "viscosity"});
      if (const YAML::Node w = p["wind"]) {
        allow(w, "params.wind",
              {"enabled", "sharpness", "windows", "steps_per_window", "centers", "lattice", "margin", "strengths",
               "optimize_centers"});
        c.wind.enabled = true;
        get(w, "enabled", c.wind.enabled);
        get(w, "sharpness", c.wind.sharpness);
        get(w, "windows", c.wind.windows);
        get(w, "steps_per_window", c.wind.steps_per_window);
        get(w, "margin", c.wind.margin);
        get(w, "optimize_centers", c.wind.optimize_centers);
        if (const YAML::Node n = w["centers"]) c.wind.centers = vec2_list(n, "'centers'");
        if (const YAML::Node n = w["lattice"]) c.wind.lattice = as<std::vector<int>>(n, "'lattice'");
        if (const YAML::Node n = w["strengths"]) c.wind.strengths = vec2_list(n, "'strengths'");
      }
      if (const YAML::Node b = p["blobs"]) {
        allow(b, "params.blobs", {"optimize", "optimize_geometry", "jitter"});
        get(b, "optimize", c.optimize_blobs);
        get(b, "optimize_geometry", c.optimize_blob_geometry);
        get(b, "jitter", c.blob_jitter);
      }
      if (const YAML::Node v = p["viscosity"]) {
        allow(v, "params.viscosity", {"optimize", "initial"});
        get(v, "optimize", c.optimize_viscosity);
        if (const YAML::Node i = v["initial"]) c.viscosity_initial = as<double>(i, "'initial'");
      }
    }
    if (const YAML::Node o = root["optimizer"]) {
      allow(o, "optimizer",
            {"algorithm", "learning_rate", "beta1", "beta2", "epsilon", "max_iterations", "tolerance",
             "param_tolerance", "checkpoint_every"});
      if (const YAML::Node a = o["algorithm"]) {
        try {
          c.optimizer.algorithm = algorithm_from_string(as<std::string>(a, "'algorithm'"));
        } catch (const std::invalid_argument& ex) {
          fail(a, ex.what());
        }
      }
      get(o, "learning_rate", c.optimizer.learning_rate);
      get(o, "beta1", c.optimizer.beta1);
      get(o, "beta2", c.optimizer.beta2);
      get(o, "epsilon", c.optimizer.epsilon);
      get(o, "max_iterations", c.optimizer.max_iterations);
      get(o, "tolerance", c.optimizer.tolerance);
      get(o, "param_tolerance", c.optimizer.param_tolerance);
      get(o, "checkpoint_every", c.optimizer.checkpoint_every);
    }
    if (const YAML::Node a = root["adjoint_check"]) {
      allow(a, "adjoint_check", {"bound"});
      get(a, "bound", c.adjoint_bound);
    }
    if (const YAML::Node gc = root["grad_check"]) {
      allow(gc, "grad_check", {"h", "subset", "min_cosine"});
      get(gc, "h", c.grad_h);
      get(gc, "subset", c.grad_subset);
      get(gc, "min_cosine", c.grad_min_cosine);
    }
    if (const YAML::Node o = root["output"]) {
      allow(o, "output", {"dir", "frame_every", "snapshot_every"});
      get(o, "dir", c.out_dir);
      get(o, "frame_every", c.frame_every);
      get(o, "snapshot_every", c.snapshot_every);
    }
  }

 private:
  std::string origin_;
};

YAML::Node parse_yaml(const std::string& text, const std::string& origin) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    std::ostringstream os;
    os << origin << ":" << ex.mark.line + 1 << ":" << ex.mark.column + 1 << ": " << ex.msg;
    throw ConfigError(os.str());
  }
}

std::string emit(const YAML::Node& n) {
  YAML::Emitter e;
  e << n;
  return e.c_str();
}

RunConfig finish(RunConfig c, const std::string& canonical, const Overrides& ov) {
  std::ostringstream can;
  can << canonical;
  if (ov.out_dir) c.out_dir = *ov.out_dir;
  if (ov.steps) {
    c.steps = *ov.steps;
    can << "\n# steps=" << *ov.steps;
  }
  if (ov.seed) {
    c.seed = *ov.seed;
    can << "\n# seed=" << *ov.seed;
  }
  if (ov.mode) {
    c.mode = *ov.mode;
    can << "\n# mode=" << *ov.mode;
  }
  c.optimizer.seed = c.seed;
  c.canonical = can.str();
  c.validate();
  return c;
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text, const std::string& origin_name, const Overrides& ov) {
  const YAML::Node user = parse_yaml(yaml_text, origin_name);
  RunConfig c;
  std::string preset = ov.preset.value_or("");
  if (user.IsMap() && user["preset"]) preset = Reader(origin_name).as<std::string>(user["preset"], "'preset'");
  std::string canonical;
  if (!preset.empty()) {
    const std::string name = "preset:" + preset;
    const YAML::Node base = parse_yaml(preset_yaml(preset), name);
    Reader(name).read(base, c);
    canonical = emit(base) + "\n---\n";
  }
  Reader(origin_name).read(user, c);
  c.preset = preset;
  canonical += emit(user);
  return finish(std::move(c), canonical, ov);
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& ov) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string(), ov);
}

RunConfig preset_config(const std::string& name, const Overrides& ov) {
  Overrides o = ov;
  o.preset = name;
  return parse_config("{}", "<preset>", o);
}

void RunConfig::validate() const {
  auto bad = [](const std::string& m) { throw ConfigError(m); };
  if (nx < 4 || ny < 4) bad("grid nx and ny must be >= 4");
  if (dx < 0.0 || (dx == 0.0 && !(width > 0.0))) bad("grid needs a positive dx or width");
  if (dt < 0.0 || cfl < 0.0) bad("sim dt and cfl must be >= 0");
  if (dt == 0.0 && cfl == 0.0) bad("sim needs dt or cfl");
  if (steps < 1) bad("sim steps must be >= 1");
  if (n_long < 1 || n_short < 1) bad("sim n_long and n_short must be >= 1");
  if (n_long % n_short != 0) bad("sim n_short must divide n_long");
  if (steps % n_long != 0) bad("sim n_long (" + std::to_string(n_long) + ") must divide steps (" +
                               std::to_string(steps) + ")");
  if (viscosity < 0.0) bad("sim viscosity must be >= 0");
  try {
    time_sparse_mode_from_string(mode);
    optimizer.validate();
  } catch (const std::invalid_argument& ex) {
    bad(ex.what());
  }
  if (!(poisson.tolerance > 0.0)) bad("poisson tolerance must be positive");
  if (init_u.type == "blobs" && init_u.blobs.empty()) bad("init.velocity blobs list is empty");
  if ((init_u.type == "snapshot" && init_u.path.empty()) || (init_xi.type == "snapshot" && init_xi.path.empty()))
    bad("snapshot initial fields need a path");
  for (const TermCfg& t : terms) {
    for (int s : t.steps)
      if (s > steps || s < -steps - 1) bad("objective step " + std::to_string(s) + " outside the run");
    if (t.kind == "keyframe-passive" && t.target_xi.type == "none") bad("keyframe-passive term needs a target");
    if ((t.kind == "terminal-velocity" || t.kind == "viscosity-target") && t.target_u.type == "none")
      bad(t.kind + " term needs a target");
  }
  if (wind.enabled) {
    if (wind.centers.empty() && wind.lattice.size() != 2) bad("wind needs centers or a [kx, ky] lattice");
    if (!(wind.sharpness > 0.0)) bad("wind sharpness must be positive");
    if (wind.windows < 1) bad("wind windows must be >= 1");
  }
  if (optimize_viscosity && viscosity_initial && *viscosity_initial < 0.0) bad("initial viscosity must be >= 0");
  if (adjoint_bound < 0.0) bad("adjoint_check bound must be >= 0");
  if (!(grad_h > 0.0)) bad("grad_check h must be positive");
  if (frame_every < 0 || snapshot_every < 0) bad("output intervals must be >= 0");
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical); }

}  // namespace fmadj::app
