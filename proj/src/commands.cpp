#include "proalign/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "proalign/errors.hpp"
#include "proalign/verify.hpp"

namespace proalign {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

std::ifstream open_in(const fs::path& p, const char* what) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw InvalidArgument(std::string(what) + ": missing '" + p.string() + "'");
  return is;
}

std::string slurp(const fs::path& p, const char* what) {
  auto is = open_in(p, what);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void cmd_gen(const RunConfig& config, const std::string& out) {
  const auto world = make_world(config);
  const auto data = sample_feedback(world, feedback_options(config), sub_seed(config, "data"));
  const fs::path dir(out);
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "world.txt");
    write_world(os, world);
  }
  {
    auto os = open_out(dir / "dataset.txt");
    write_dataset(os, data);
  }
  nlohmann::ordered_json m;
  m["seed"] = config.seed;
  m["world_seed"] = sub_seed(config, "world");
  m["data_seed"] = sub_seed(config, "data");
  m["world"] = {{"kind", to_string(config.world)},
                {"responses", world.space()->size()},
                {"reward_scale", world.reward_scale}};
  nlohmann::ordered_json d;
  d["kind"] = to_string(config.feedback);
  d["records"] = std::visit([](const auto& ds) { return ds.records().size(); }, data);
  d["total_count"] = std::visit([](const auto& ds) { return ds.total_count(); }, data);
  if (const auto* bd = std::get_if<BinaryDataset>(&data)) {
    d["desired_count"] = bd->class_count(Label::Desired);
    d["undesired_count"] = bd->class_count(Label::Undesired);
  }
  if (const auto* sd = std::get_if<ScalarDataset>(&data)) d["groups"] = sd->group_count();
  m["data"] = d;
  m["files"] = {"world.txt", "dataset.txt"};
  m["config"] = serialize(config);
  auto os = open_out(dir / "manifest.json");
  os << m.dump(2) << '\n';
}

int cmd_train(const RunConfig& config, const std::string& out) {
  if (config.data_dir.empty()) throw InvalidArgument("train: [train] data_dir is not set");
  const fs::path src(config.data_dir);
  auto wis = open_in(src / "world.txt", "train");
  const auto world = read_world(wis);
  auto dis = open_in(src / "dataset.txt", "train");
  const auto data = read_dataset(dis, world.space());
  const auto spec = make_loss_spec(config, world, data);

  const fs::path dir(out);
  if (fs::exists(dir)) throw InvalidArgument("train: '" + out + "' exists; runs are atomic and never resumed");
  const auto result = train(world.base, spec, world, config.steps, config.lr, sub_seed(config, "train"));

  // Everything lands in a sibling staging directory that is renamed at the end.
  fs::path staging = dir;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  {
    auto os = open_out(staging / "config.ini");
    os << serialize(config);
  }
  fs::copy_file(src / "world.txt", staging / "world.txt");
  fs::copy_file(src / "dataset.txt", staging / "dataset.txt");
  {
    auto os = open_out(staging / "trajectory.csv");
    write_trajectory_csv(os, result.trajectory);
  }
  {
    auto os = open_out(staging / "rewards.csv");
    write_rewards_csv(os, result.trajectory, *world.space());
  }
  {
    auto os = open_out(staging / "diagnostics.json");
    os << diagnostics_json(diagnostics(result.trajectory));
  }
  fs::rename(staging, dir);
  return result.trajectory.diverged ? kExitNumerical : kExitOk;
}

int cmd_verify(const RunConfig& config, const std::optional<std::string>& only, bool inject_bug,
               const std::optional<std::string>& out, std::ostream& log) {
  VerifyOptions opts;
  opts.seed = config.seed;
  opts.inject_bug = inject_bug;
  const auto reports = run_verify(opts, only);
  std::ostringstream text;
  bool ok = true;
  for (const auto& r : reports) {
    text << to_text(r) << '\n';
    ok = ok && r.pass;
  }
  log << text.str();
  if (out) {
    fs::create_directories(*out);
    auto os = open_out(fs::path(*out) / "verify.txt");
    os << text.str();
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

void cmd_report(const std::vector<std::string>& runs, const std::string& out, std::ostream& log) {
  if (runs.empty()) throw InvalidArgument("report: need at least one run directory");
  struct Run {
    std::string path;
    RunConfig config;
    std::vector<std::string> rows;
    nlohmann::json diag;
  };
  std::string expected_header;
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) expected_header += (i ? "," : "") + kTrajectoryColumns[i];
  std::vector<Run> loaded;
  for (const auto& path : runs) {
    Run r;
    r.path = path;
    r.config = parse_config(slurp(fs::path(path) / "config.ini", "report"));
    auto is = open_in(fs::path(path) / "trajectory.csv", "report");
    std::string header;
    std::getline(is, header);
    if (header != expected_header) throw InvalidArgument("report: trajectory schema mismatch in '" + path + "'");
    for (std::string line; std::getline(is, line);) {
      if (!line.empty()) r.rows.push_back(line);
    }
    try {
      r.diag = nlohmann::json::parse(slurp(fs::path(path) / "diagnostics.json", "report"));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("report: bad diagnostics in '" + path + "': " + e.what());
    }
    loaded.push_back(std::move(r));
  }
  std::stable_sort(loaded.begin(), loaded.end(), [](const Run& a, const Run& b) {
    const auto ka = to_string(a.config.loss), kb = to_string(b.config.loss);
    if (ka != kb) return ka < kb;
    return a.config.seed < b.config.seed;
  });

  fs::create_directories(out);
  {
    auto os = open_out(fs::path(out) / "merged.csv");
    os << "loss_kind,seed,run," << expected_header << '\n';
    for (const auto& r : loaded) {
      for (const auto& row : r.rows) {
        os << to_string(r.config.loss) << ',' << r.config.seed << ',' << fs::path(r.path).filename().string() << ','
           << row << '\n';
      }
    }
  }
  std::ostringstream summary;
  summary << "run,loss_kind,seed,steps,diverged,final_loss,initial_logp_preferred,final_logp_preferred,"
             "final_reward_preferred,final_expected_latent_reward,last_quartile_negative_reward_fraction\n";
  for (const auto& r : loaded) {
    const auto& d = r.diag;
    summary << fs::path(r.path).filename().string() << ',' << to_string(r.config.loss) << ',' << r.config.seed << ','
            << d.at("steps").get<std::size_t>() << ',' << (d.at("diverged").get<bool>() ? "true" : "false") << ','
            << fmt(d.at("loss").at("final").get<double>()) << ','
            << fmt(d.at("mean_logp_preferred").at("initial").get<double>()) << ','
            << fmt(d.at("mean_logp_preferred").at("final").get<double>()) << ','
            << fmt(d.at("mean_reward_preferred").at("final").get<double>()) << ','
            << fmt(d.at("expected_latent_reward").at("final").get<double>()) << ','
            << fmt(d.at("last_quartile_negative_reward_fraction").get<double>()) << '\n';
  }
  auto os = open_out(fs::path(out) / "summary.csv");
  os << summary.str();
  log << summary.str();
}

}  // namespace proalign
