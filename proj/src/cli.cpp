#include "brickdemo/cli.hpp"

#include <csignal>
#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "brickdemo/feasibility.hpp"
#include "brickdemo/http_api.hpp"
#include "brickdemo/learner.hpp"
#include "brickdemo/perception.hpp"
#include "brickdemo/sequencer.hpp"
#include "brickdemo/service.hpp"
#include "brickdemo/taskgraph.hpp"
#include "brickdemo/twin.hpp"

namespace brickdemo::cli {

namespace {

struct Common {
  std::string catalog_path;
  int tool_margin = manipulation::ToolProfile{}.margin;
  int tool_height = manipulation::ToolProfile{}.body_height;
  int tool_length = manipulation::ToolProfile{}.length;
  std::string reach;
  int stability_window = 3;
  int resolution = 4;
  std::vector<int> plate{48, 48, 16};
  std::string output;

  manipulation::ToolProfile tool() const {
    manipulation::ToolProfile t{tool_margin, tool_height, tool_length};
    t.validate();
    return t;
  }
  Dims plate_dims() const { return {plate[0], plate[1], plate[2]}; }
  std::shared_ptr<const Catalog> catalog() const {
    if (catalog_path.empty()) return default_catalog_ptr();
    return std::make_shared<const Catalog>(parse_catalog(read_file(catalog_path)));
  }
  twin::ReachEnvelope reach_for(Dims storage, Dims assembly) const {
    return reach.empty() ? twin::ReachEnvelope::full(storage, assembly) : twin::parse_reach(reach, storage, assembly);
  }
};

void emit(const Common& c, std::ostream& out, const std::string& content) {
  if (c.output.empty()) {
    out << content;
  } else {
    write_file(c.output, content);
  }
}

WorkspaceState load_state(const std::string& path, const std::shared_ptr<const Catalog>& catalog, WorkspaceId ws) {
  return build_state(parse_structure(read_file(path)), catalog, ws);
}

int cmd_verify(const Common& c, const std::string& path, std::ostream& out) {
  const auto file = parse_structure(read_file(path));
  const auto verdict = feasibility::check_placements(file.dims, c.catalog(), file.placements);
  emit(c, out, format_verdict("feasibility", verdict));
  return verdict.ok() ? kExitOk : kExitNegative;
}

int cmd_learn(const Common& c, const std::string& path, std::ostream& out) {
  const auto log = perception::parse_demo(read_file(path));
  const int max_height = c.plate[2];
  const auto keyframes = perception::detect_keyframes(log.frames, c.stability_window, max_height);
  const auto graph = learner::learn(keyframes, c.catalog(), max_height);
  emit(c, out, taskgraph::serialize(graph));
  return kExitOk;
}

int cmd_plan(const Common& c, const std::string& path, const std::string& storage_path, std::ostream& out,
             std::ostream& err) {
  const auto catalog = c.catalog();
  const auto target = load_state(path, catalog, WorkspaceId::assembly);
  WorkspaceState storage = [&] {
    if (!storage_path.empty()) return load_state(storage_path, catalog, WorkspaceId::storage);
    std::vector<std::string> types;
    for (const auto& p : sequencer::ordered_targets(target)) types.push_back(p.type_id);
    return pack_storage(types, c.plate_dims(), catalog);
  }();
  sequencer::SequencingProblem problem{target, storage, c.tool(), c.reach_for(storage.dims(), target.dims())};
  std::optional<TaskGraph> graph;
  try {
    graph = sequencer::find_order(problem);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleTarget) throw;
    err << "brickdemo: " << e.what() << "\n";
    return kExitNegative;
  }
  if (!graph) {
    err << "brickdemo: no operable assembly order exists\n";
    return kExitNegative;
  }
  emit(c, out, taskgraph::serialize(*graph));
  return kExitOk;
}

int cmd_replay(const Common& c, const std::string& path, const std::string& storage_path, bool roundtrip,
               std::ostream& out) {
  const auto catalog = c.catalog();
  const auto graph = taskgraph::parse(read_file(path));
  const Dims plate = c.plate_dims();
  const auto tool = c.tool();
  if (graph.direction == Direction::disassembly) {
    if (roundtrip) throw Error(ErrorCode::InvalidArgument, "--roundtrip needs an assembly graph");
    WorkspaceState storage = storage_path.empty() ? WorkspaceState(WorkspaceId::storage, plate, catalog)
                                                  : load_state(storage_path, catalog, WorkspaceId::storage);
    const auto report = twin::execute(graph, storage, plate, tool, c.reach_for(storage.dims(), plate));
    emit(c, out, twin::serialize_report(report));
    return report.operable() ? kExitOk : kExitNegative;
  }
  WorkspaceState storage = storage_path.empty() ? taskgraph::storage_layout(graph, catalog, plate)
                                                : load_state(storage_path, catalog, WorkspaceId::storage);
  const WorkspaceState assembly(WorkspaceId::assembly, plate, catalog);
  const auto reach = c.reach_for(storage.dims(), plate);
  if (roundtrip) {
    const auto rt = twin::verify_roundtrip(graph, storage, assembly, tool, reach);
    emit(c, out, twin::serialize_report(rt.assembly) + twin::serialize_report(rt.disassembly));
    return rt.assembly.operable() && rt.disassembly.operable() ? kExitOk : kExitNegative;
  }
  const auto report = twin::execute(graph, storage, assembly, tool, reach);
  emit(c, out, twin::serialize_report(report));
  return report.operable() ? kExitOk : kExitNegative;
}

int cmd_render(const Common& c, const std::string& path, const std::string& storage_path, double noise,
               std::uint64_t seed, std::ostream& out) {
  const auto catalog = c.catalog();
  const auto graph = taskgraph::parse(read_file(path));
  if (graph.direction != Direction::assembly) throw Error(ErrorCode::InvalidArgument, "render needs an assembly graph");
  const Dims plate = c.plate_dims();
  WorkspaceState storage = storage_path.empty() ? taskgraph::storage_layout(graph, catalog, plate)
                                                : load_state(storage_path, catalog, WorkspaceId::storage);
  perception::DemoRenderOptions options;
  options.resolution = c.resolution;
  options.stable_frames = c.stability_window + 1;
  options.transition_frames = std::min(2, c.stability_window - 1);
  options.noise_fraction = noise;
  options.seed = seed;
  const auto log =
      perception::render_demonstration(graph, storage, WorkspaceState(WorkspaceId::assembly, plate, catalog), options);
  emit(c, out, perception::serialize_demo(log));
  return kExitOk;
}

http::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Common& c, const std::string& bind, int port, const std::string& data_dir, std::ostream& err) {
  service::SessionManager manager(c.catalog(), data_dir);
  http::Server server(manager);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  err << "brickdemo: serving on " << bind << ":" << port << "\n";
  server.run(bind, port);
  g_server = nullptr;
  return kExitOk;
}

/// Applies config file values to options the command line left unset.
void apply_config(CLI::App& app, const std::string& path) {
  static const std::map<std::string, std::string> kAliases{
      {"tool.margin", "--tool-margin"},       {"tool.body_height", "--tool-height"},
      {"tool.length", "--tool-length"},       {"stability_window", "--stability-window"},
      {"perception.stability_window", "--stability-window"}};
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    std::string key;
    for (const auto& parent : item.parents) key += parent + ".";
    key += item.name;
    if (item.name == "++" || item.name == "--") continue;
    auto alias = kAliases.find(key);
    const std::string name = alias != kAliases.end() ? alias->second : "--" + key;
    auto* opt = name == "--config" ? nullptr : app.get_option_no_throw(name);
    if (!opt) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    for (const auto& value : item.inputs) opt->add_result(value);
    opt->run_callback();
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Brick assembly demonstrations: verify, learn, plan, replay, render, serve", "brickdemo"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Config file (key = value, e.g. tool.margin = 2); flags override it")
      ->check(CLI::ExistingFile);

  Common c;
  app.add_option("--catalog", c.catalog_path, "Brick catalog file (default: built-in catalog)");
  app.add_option("--tool-margin", c.tool_margin, "Tool clearance margin m in studs")->capture_default_str();
  app.add_option("--tool-height", c.tool_height, "Tool body height H_b in layers")->capture_default_str();
  app.add_option("--tool-length", c.tool_length, "Tool length in layers, for the reach height")
      ->capture_default_str();
  app.add_option("--reach", c.reach, "Reach envelope, e.g. storage:0,0,48,48;assembly:0,0,48,48;height:64");
  app.add_option("--stability-window", c.stability_window, "Frames a keyframe must stay stable (k)")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000));
  app.add_option("--resolution", c.resolution, "Pixels per stud for rendered demos")
      ->capture_default_str()
      ->check(CLI::Range(1, 64));
  app.add_option("--plate", c.plate, "Plate size W L H")->expected(3)->capture_default_str()->check(
      CLI::Range(1, 4096));
  app.add_option("-o,--output", c.output, "Output file (default: standard output)");

  std::string input;
  std::string storage_path;
  bool roundtrip = false;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string data_dir;

  auto* verify = app.add_subcommand("verify", "Check a structure file; exit 0 feasible, 2 infeasible");
  verify->add_option("structure", input, "Structure file")->required();
  verify->fallthrough();

  auto* learn = app.add_subcommand("learn", "Learn a task graph from a demo log");
  learn->add_option("demo", input, "Demo log")->required();
  learn->fallthrough();

  auto* plan = app.add_subcommand("plan", "Find an operable assembly order for a structure file");
  plan->add_option("structure", input, "Target structure file")->required();
  plan->add_option("--storage", storage_path, "Storage layout (default: bricks packed on the plate)");
  plan->fallthrough();

  auto* replay = app.add_subcommand("replay", "Execute a task graph in the twin; exit 0 operable, 2 inoperable");
  replay->add_option("graph", input, "Task-graph file")->required();
  replay->add_option("--storage", storage_path, "Storage layout (default: the graph's storage poses)");
  replay->add_flag("--roundtrip", roundtrip, "Assemble, then disassemble back into storage");
  replay->fallthrough();

  auto* render = app.add_subcommand("render", "Render a synthetic demo log from an assembly task graph");
  render->add_option("graph", input, "Task-graph file")->required();
  render->add_option("--storage", storage_path, "Storage layout (default: the graph's storage poses)");
  render->add_option("--noise", noise, "Share of each cell's pixels replaced by noise")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  render->add_option("--seed", seed, "Noise seed")->capture_default_str();
  render->fallthrough();

  auto* serve = app.add_subcommand("serve", "Serve the session HTTP API");
  serve->add_option("--bind", bind, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", data_dir, "Directory where sessions are persisted");
  serve->fallthrough();

  std::vector<std::string> argv_storage{"brickdemo"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "brickdemo: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (!config_path.empty()) apply_config(app, config_path);
  } catch (const std::exception& e) {
    err << "brickdemo: config " << config_path << ": " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*verify) return cmd_verify(c, input, out);
    if (*learn) return cmd_learn(c, input, out);
    if (*plan) return cmd_plan(c, input, storage_path, out, err);
    if (*replay) return cmd_replay(c, input, storage_path, roundtrip, out);
    if (*render) return cmd_render(c, input, storage_path, noise, seed, out);
    if (*serve) return cmd_serve(c, bind, port, data_dir, err);
  } catch (const Error& e) {
    err << "brickdemo: " << to_string(e.code()) << ": " << e.what();
    if (e.index()) err << " (index " << *e.index() << ")";
    err << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "brickdemo: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace brickdemo::cli
