#include "proalign/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "proalign/errors.hpp"
#include "proalign/rng.hpp"

namespace proalign {

std::string_view to_string(WorldKind kind) {
  return kind == WorldKind::Tabular ? "tabular" : "autoregressive";
}

WorldKind parse_world_kind(std::string_view name) {
  if (name == "tabular") return WorldKind::Tabular;
  if (name == "autoregressive") return WorldKind::Autoregressive;
  throw InvalidArgument("unknown world kind '" + std::string(name) + "'");
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) throw InvalidArgument("bad number '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  if (s.empty() || s.size() > 20 || s.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidArgument("bad unsigned integer '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::out_of_range&) {
    throw InvalidArgument("unsigned integer out of range '" + s + "'");
  }
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw InvalidArgument("bad boolean '" + s + "' (true|false)");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::string_view label_name(Label l) { return l == Label::Desired ? "desired" : "undesired"; }

Label to_label(const std::string& s) {
  if (s == "desired") return Label::Desired;
  if (s == "undesired") return Label::Undesired;
  throw InvalidArgument("bad label '" + s + "' (desired|undesired)");
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class T>
Field num(const char* sec, const char* key, T RunConfig::*m) {
  if constexpr (std::is_same_v<T, double>) {
    return {sec, key, [m](const RunConfig& c) { return fmt(c.*m); },
            [m](RunConfig& c, const std::string& v) { c.*m = to_double(v); }};
  } else {
    return {sec, key, [m](const RunConfig& c) { return std::to_string(c.*m); },
            [m](RunConfig& c, const std::string& v) { c.*m = static_cast<T>(to_u64(v)); }};
  }
}

Field flag(const char* sec, const char* key, bool RunConfig::*m) {
  return {sec, key, [m](const RunConfig& c) { return from_bool(c.*m); },
          [m](RunConfig& c, const std::string& v) { c.*m = to_bool(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      num("run", "seed", &RunConfig::seed),
      {"world", "kind", [](const RunConfig& c) { return std::string(to_string(c.world)); },
       [](RunConfig& c, const std::string& v) { c.world = parse_world_kind(v); }},
      num("world", "size", &RunConfig::size),
      num("world", "vocab", &RunConfig::vocab),
      num("world", "length", &RunConfig::length),
      num("world", "reward_scale", &RunConfig::reward_scale),
      {"data", "kind", [](const RunConfig& c) { return std::string(to_string(c.feedback)); },
       [](RunConfig& c, const std::string& v) { c.feedback = parse_feedback_kind(v); }},
      num("data", "records", &RunConfig::records),
      num("data", "group_size", &RunConfig::group_size),
      {"data", "noise", [](const RunConfig& c) { return c.noise ? fmt(*c.noise) : std::string("auto"); },
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") {
           c.noise.reset();
         } else {
           c.noise = to_double(v);
         }
       }},
      {"data", "imbalance",
       [](const RunConfig& c) { return c.imbalance ? std::string(label_name(*c.imbalance)) : std::string("none"); },
       [](RunConfig& c, const std::string& v) {
         if (v == "none") {
           c.imbalance.reset();
         } else {
           c.imbalance = to_label(v);
         }
       }},
      num("data", "keep", &RunConfig::keep),
      {"loss", "kind", [](const RunConfig& c) { return std::string(to_string(c.loss)); },
       [](RunConfig& c, const std::string& v) { c.loss = parse_loss_kind(v); }},
      num("loss", "beta", &RunConfig::beta),
      num("loss", "alpha", &RunConfig::alpha),
      num("loss", "eta", &RunConfig::eta),
      flag("loss", "pin_hyper", &RunConfig::pin_hyper),
      flag("loss", "class_reweight", &RunConfig::class_reweight),
      {"loss", "prop_form", [](const RunConfig& c) { return std::string(to_string(c.prop_form)); },
       [](RunConfig& c, const std::string& v) { c.prop_form = parse_prop_form(v); }},
      num("loss", "kto_z0", &RunConfig::kto_z0),
      num("loss", "kto_lambda_d", &RunConfig::kto_lambda_d),
      num("loss", "kto_lambda_u", &RunConfig::kto_lambda_u),
      {"loss", "kto_sign_mode",
       [](const RunConfig& c) {
         return c.kto_sign_mode ? std::string(to_string(*c.kto_sign_mode)) : std::string("unset");
       },
       [](RunConfig& c, const std::string& v) {
         if (v == "unset") {
           c.kto_sign_mode.reset();
         } else {
           c.kto_sign_mode = parse_kto_sign_mode(v);
         }
       }},
      num("train", "steps", &RunConfig::steps),
      num("train", "lr", &RunConfig::lr),
      {"train", "data_dir", [](const RunConfig& c) { return c.data_dir; },
       [](RunConfig& c, const std::string& v) { c.data_dir = v; }},
  };
  return f;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string serialize(const RunConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    os << f.key << " = " << f.get(config) << '\n';
  }
  return os.str();
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::set<std::string> sections, seen;
  for (const auto& f : fields()) sections.insert(f.section);
  std::string section;
  std::istringstream is{std::string(text)};
  int lineno = 0;
  for (std::string raw; std::getline(is, raw);) {
    ++lineno;
    const std::string line = trim(raw);
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(where + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!sections.count(section)) throw InvalidArgument(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + "expected key = value");
    if (section.empty()) throw InvalidArgument(where + "key outside a section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (section == f.section && key == f.key) field = &f;
    }
    if (!field) throw InvalidArgument(where + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) throw InvalidArgument(where + "duplicate key '" + key + "'");
    try {
      field->set(c, value);
    } catch (const std::invalid_argument& e) {
      throw InvalidArgument(where + section + "." + key + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t sub_seed(const RunConfig& config, std::string_view name) { return derive_seed(config.seed, name); }

WorldSpec make_world(const RunConfig& config) {
  const auto seed = sub_seed(config, "world");
  if (config.world == WorldKind::Tabular) return gen_world(seed, config.size, config.reward_scale);
  return gen_world(seed, config.vocab, config.length, config.reward_scale);
}

FeedbackOptions feedback_options(const RunConfig& config) {
  FeedbackOptions o;
  o.kind = config.feedback;
  o.n_records = config.records;
  o.group_size = config.group_size;
  o.noise = config.noise ? *config.noise : -1.0;
  if (config.imbalance) o.imbalance = ImbalanceSpec{*config.imbalance, config.keep};
  return o;
}

LossSpec make_loss_spec(const RunConfig& config, const WorldSpec& world, const Dataset& data) {
  LossSpec spec =
      spec_from_dataset(config.loss, policy_distribution(world.base), data, config.beta, config.alpha, config.eta);
  spec.pin_hyper = config.pin_hyper;
  spec.class_reweight = config.class_reweight;
  spec.prop_form = config.prop_form;
  spec.kto.z0 = config.kto_z0;
  spec.kto.lambda_d = config.kto_lambda_d;
  spec.kto.lambda_u = config.kto_lambda_u;
  spec.kto.sign_mode = config.kto_sign_mode;
  return spec;
}

}  // namespace proalign
