#include "kanto/cli.hpp"

#include <signal.h>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kanto/bench.hpp"
#include "kanto/cluster.hpp"
#include "kanto/dataset.hpp"
#include "kanto/error.hpp"
#include "kanto/labeld/http_server.hpp"
#include "kanto/labeld/label_service.hpp"
#include "kanto/parallel.hpp"
#include "kanto/parameters.hpp"
#include "kanto/pipeline.hpp"
#include "kanto/project.hpp"
#include "kanto/similarity.hpp"
#include "kanto/synth.hpp"

namespace kanto::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kSampleSongs = 20;

struct Common {
  std::string project = ".";
  std::string params_file;
  std::string threads;  // one count, or a comma-separated list for bench
  std::uint64_t seed = 42;
  std::optional<bool> song_level;
  bool json = false;
};

struct Context {
  const Common& common;
  std::ostream& out;
  ProjectDirs dirs;
  Parameters params;
  std::size_t threads;
};

Parameters resolve_parameters(const Common& c, const ProjectDirs& dirs) {
  Parameters p;
  if (!c.params_file.empty())
    p = load_parameters(c.params_file);
  else if (fs::exists(dirs.root / "params.json"))
    p = load_parameters(dirs.root / "params.json");
  if (c.song_level) p.song_level = *c.song_level;
  const auto violations = validate_parameters(p);
  if (!violations.empty()) {
    std::string msg = "invalid parameters:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw Error(ErrorCode::validation, msg);
  }
  return p;
}

std::vector<std::size_t> parse_worker_list(const std::string& s);

Context make_context(const Common& c, std::ostream& out) {
  const ProjectDirs dirs = project_dirs(c.project);
  std::size_t threads = 0;
  if (!c.threads.empty()) {
    const auto list = parse_worker_list(c.threads);
    if (list.size() != 1) throw Error(ErrorCode::validation, "--threads takes a single count here");
    threads = list.front();
  }
  return Context{c, out, dirs, resolve_parameters(c, dirs), resolve_worker_count(threads)};
}

// Prints either the JSON document or the human-readable lines.
void report(const Context& ctx, const ordered_json& j, const std::vector<std::string>& lines) {
  if (ctx.common.json) {
    ctx.out << j.dump(2) << "\n";
    return;
  }
  for (const auto& l : lines) ctx.out << l << "\n";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Dataset load_existing(const ProjectDirs& dirs) {
  if (!dataset_exists(dirs)) throw Error(ErrorCode::state, "no dataset in " + dirs.root.string() + "; run `kanto ingest` first");
  return load_dataset(dirs);
}

// Edits made in the review app are folded in before anything rewrites the dataset.
Dataset load_for_update(const ProjectDirs& dirs) {
  if (dataset_exists(dirs)) labeld::compact_journal(dirs);
  return load_existing(dirs);
}

int cmd_init(const Context& ctx, bool sample) {
  init_project(ctx.dirs.root);
  const fs::path params_path = ctx.dirs.root / "params.json";
  const bool wrote_params = !fs::exists(params_path);
  if (wrote_params) save_parameters(ctx.params, params_path);
  std::size_t songs = 0;
  if (sample) {
    synth::RepertoireOptions o;
    o.birds = 1;
    o.types_per_bird = 2;
    o.songs_per_type = kSampleSongs / (o.years.size() * o.types_per_bird);
    o.sample_rate_hz = ctx.params.sample_rate_hz;
    o.seed = ctx.common.seed;
    const auto corpus = synth::make_repertoire_corpus(o);
    synth::write_corpus(corpus, ctx.dirs.raw_data / "sample");
    songs = corpus.size();
  }
  ordered_json j;
  j["project"] = ctx.dirs.root.string();
  j["params"] = params_path.string();
  j["params_written"] = wrote_params;
  j["sample_songs"] = songs;
  std::vector<std::string> lines{"initialised " + ctx.dirs.root.string()};
  if (wrote_params) lines.push_back("wrote " + params_path.string());
  if (sample) lines.push_back("wrote " + std::to_string(songs) + " sample songs to " + (ctx.dirs.raw_data / "sample").string());
  report(ctx, j, lines);
  return 0;
}

int cmd_ingest(const Context& ctx) {
  if (!fs::is_directory(ctx.dirs.raw_data))
    throw Error(ErrorCode::state, ctx.dirs.raw_data.string() + " does not exist; run `kanto init` first");
  const IngestReport rep = ingest(ctx.dirs);
  Dataset ds = build_dataset(ctx.dirs, rep.catalogue, ctx.params, ctx.threads);
  ds = save_dataset(std::move(ds));
  ordered_json j;
  j["revision"] = ds.revision;
  j["records"] = ds.records.size();
  j["failures"] = ordered_json::array();
  for (const auto& f : ds.failures) j["failures"].push_back({{"id", f.id}, {"message", f.message}});
  j["warnings"] = rep.warnings;
  std::vector<std::string> lines{"ingested " + std::to_string(ds.records.size()) + " recordings (revision " +
                                 std::to_string(ds.revision) + ")"};
  for (const auto& w : rep.warnings) lines.push_back("warning: " + w);
  for (const auto& f : ds.failures) lines.push_back("failed: " + f.id + ": " + f.message);
  report(ctx, j, lines);
  return 0;
}

int cmd_segment(const Context& ctx) {
  Dataset ds = segment_all(load_for_update(ctx.dirs), ctx.params, ctx.threads);
  ds = save_dataset(std::move(ds));
  std::size_t units = 0, segmented = 0, zero = 0, failed = 0;
  for (const auto& r : ds.records) {
    if (r.segmentation) units += r.segmentation->unit_count();
    segmented += r.status == RecordStatus::segmented;
    zero += r.status == RecordStatus::zero_units;
    failed += r.status == RecordStatus::failed;
  }
  ordered_json j;
  j["revision"] = ds.revision;
  j["songs"] = segmented;
  j["units"] = units;
  j["zero_unit_songs"] = zero;
  j["failed"] = failed;
  std::vector<std::string> lines{"segmented " + std::to_string(segmented) + " songs into " + std::to_string(units) +
                                 " units (revision " + std::to_string(ds.revision) + ")"};
  if (zero) lines.push_back(std::to_string(zero) + " songs had no units");
  for (const auto& f : ds.failures) lines.push_back("failed: " + f.id + ": " + f.message);
  report(ctx, j, lines);
  return 0;
}

int cmd_embed(const Context& ctx, const std::string& method, std::size_t neighbors) {
  EmbedOptions o;
  o.method = embedding_method_from_string(method);
  o.n_neighbors = neighbors;
  o.seed = ctx.common.seed;
  o.threads = ctx.threads;
  EmbedOutcome res = embed_dataset(load_for_update(ctx.dirs), ctx.params, o);
  Dataset ds = save_dataset(std::move(res.dataset));
  ordered_json j;
  j["revision"] = ds.revision;
  j["method"] = method;
  j["tables"] = ds.embeddings.size();
  j["notes"] = res.notes;
  std::vector<std::string> lines{"embedded " + std::to_string(ds.embeddings.size()) + " individuals with " + method +
                                 " (revision " + std::to_string(ds.revision) + ")"};
  for (const auto& n : res.notes) lines.push_back("note: " + n);
  report(ctx, j, lines);
  return 0;
}

int cmd_cluster(const Context& ctx, bool global) {
  ClusterOutcome res = cluster_ids(load_for_update(ctx.dirs), ctx.params, ClusterOptions{global, ctx.threads});
  Dataset ds = save_dataset(std::move(res.dataset));
  ordered_json j;
  j["revision"] = ds.revision;
  j["groups"] = ordered_json::array();
  std::vector<std::string> lines;
  for (const auto& a : res.assignments) {
    j["groups"].push_back({{"individual", a.individual_id},
                           {"clusters", a.cluster_count},
                           {"noise_fraction", a.noise_fraction()},
                           {"min_cluster_size", a.min_cluster_size}});
    lines.push_back((a.individual_id.empty() ? std::string("all") : a.individual_id) + ": " +
                    std::to_string(a.cluster_count) + " clusters, " + fmt("%.1f", 100.0 * a.noise_fraction()) +
                    "% noise");
  }
  j["warnings"] = res.warnings;
  for (const auto& w : res.warnings) lines.push_back("warning: " + w);
  lines.push_back("revision " + std::to_string(ds.revision));
  report(ctx, j, lines);
  return 0;
}

int cmd_app(const Context& ctx, const std::string& host, int port, const std::string& ui_dir) {
  labeld::LabelService service(ctx.dirs);
  labeld::HttpServer server(service, labeld::ServerOptions{host, port, ui_dir});

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int bound = server.start();
  ordered_json j;
  j["url"] = "http://" + host + ":" + std::to_string(bound) + "/";
  j["revision"] = service.revision();
  j["journal_entries"] = service.journal_size();
  report(ctx, j, {"serving " + j["url"].get<std::string>() + " (Ctrl-C to stop)"});
  ctx.out.flush();

  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return 0;
}

int cmd_export(const Context& ctx, double split) {
  const Dataset ds = load_for_update(ctx.dirs);
  const ExportSummary s = export_training_set(ds, split, ctx.common.seed);
  ordered_json j;
  j["revision"] = ds.revision;
  j["train"] = s.train;
  j["test"] = s.test;
  j["classes"] = ordered_json::object();
  for (const auto& [cls, counts] : s.per_class) j["classes"][cls] = {{"train", counts.first}, {"test", counts.second}};
  report(ctx, j,
         {"exported " + std::to_string(s.train) + " train / " + std::to_string(s.test) + " test songs in " +
          std::to_string(s.per_class.size()) + " classes to " + ctx.dirs.output.string()});
  return 0;
}

int cmd_similarity(const Context& ctx, const std::string& out_dir) {
  const Dataset ds = load_existing(ctx.dirs);
  const SongVectorTable vectors = song_vectors(ds);
  const SimilarityMatrix m = pairwise_similarity(vectors.songs, ctx.threads);
  const ReIdReport r = cross_year_reid(m);
  const fs::path dir = out_dir.empty() ? ctx.dirs.output / "similarity" : fs::path(out_dir);
  write_reid_report(r, dir);

  ordered_json j = ordered_json::parse(reid_report_to_json(r));
  j["report_dir"] = dir.string();
  j["excluded_songs"] = vectors.excluded;
  std::size_t correct = 0;
  for (const auto& t : r.trials) correct += t.correct;
  std::vector<std::string> lines{
      "re-identified " + std::to_string(correct) + " of " + std::to_string(r.trials.size()) + " individuals (" +
          fmt("%.1f", 100.0 * r.accuracy) + "%)",
      "chance: " + fmt("%.2f", 100.0 * r.chance_individuals) + "% (individuals)" +
          (r.chance_song_types ? ", " + fmt("%.2f", 100.0 * *r.chance_song_types) + "% (song types)" : std::string()),
      "features: " + r.feature_source, "report written to " + dir.string()};
  for (const auto& b : r.excluded) lines.push_back("no following year for " + b);
  report(ctx, j, lines);
  return 0;
}

std::vector<std::size_t> parse_worker_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::validation, "--threads must be a positive integer or a comma-separated list of them");
    }
  }
  if (out.empty()) throw Error(ErrorCode::validation, "--threads is empty");
  return out;
}

int cmd_bench(const Common& c, std::ostream& out, std::size_t units, const std::string& worker_list,
              std::size_t scale_units) {
  Parameters p;
  if (!c.params_file.empty()) p = load_parameters(c.params_file);
  Context ctx{c, out, project_dirs(c.project), p, 1};
  if (units == 0) throw Error(ErrorCode::validation, "--units must be positive");
  const auto workers = parse_worker_list(worker_list);

  const BenchCorpus corpus = make_bench_corpus(units, c.seed, p);
  std::vector<BenchRun> runs;
  for (std::size_t w : workers) runs.push_back(run_segmentation_bench(corpus, p, w));

  const bool identical = std::all_of(runs.begin(), runs.end(), [&](const BenchRun& r) { return r.digest == runs[0].digest; });
  ordered_json j;
  j["units"] = corpus.units;
  j["songs"] = corpus.items.size();
  j["hardware_threads"] = std::thread::hardware_concurrency();
  j["runs"] = ordered_json::array();
  std::vector<std::string> lines{"segmenting " + std::to_string(corpus.units) + " synthetic units in " +
                                 std::to_string(corpus.items.size()) + " songs",
                                 "workers  wall_s  units/s  units_found  digest"};
  for (const auto& r : runs) {
    const double projected = r.seconds * static_cast<double>(scale_units) / static_cast<double>(corpus.units);
    j["runs"].push_back({{"workers", r.workers},
                         {"seconds", r.seconds},
                         {"units_per_second", r.units_per_second()},
                         {"units_found", r.units_found},
                         {"failures", r.failures},
                         {"digest", r.digest},
                         {"projected_seconds_for_scale_units", projected}});
    char buf[160];
    std::snprintf(buf, sizeof buf, "%7zu  %6.2f  %7.0f  %11zu  %.16s", r.workers, r.seconds, r.units_per_second(),
                  r.units_found, r.digest.c_str());
    lines.emplace_back(buf);
  }
  j["identical_outputs"] = identical;
  j["scale_units"] = scale_units;
  lines.push_back(std::string("outputs identical across worker counts: ") + (identical ? "yes" : "NO"));
  if (runs.size() > 1) {
    const double speedup = runs.front().seconds / runs.back().seconds;
    j["speedup"] = speedup;
    lines.push_back("speedup " + std::to_string(runs.front().workers) + " -> " + std::to_string(runs.back().workers) +
                    " workers: " + fmt("%.2fx", speedup));
  }
  lines.push_back("projected wall time for " + std::to_string(scale_units) + " units at " +
                  std::to_string(runs.back().workers) + " workers: " +
                  fmt("%.0f s", runs.back().seconds * static_cast<double>(scale_units) / static_cast<double>(corpus.units)));
  report(ctx, j, lines);
  bool ok = identical;
  for (const auto& r : runs) ok = ok && r.failures == 0 && r.units_found == corpus.units;
  if (!ok) throw Error(ErrorCode::internal, "benchmark outputs are inconsistent");
  return 0;
}

void print_error(std::ostream& err, bool json, const std::string& code, const std::string& message) {
  if (json) {
    ordered_json j;
    j["error"] = {{"code", code}, {"message", message}};
    err << j.dump() << "\n";
  } else {
    err << "kanto: error: " << message << "\n";
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"kanto: segment, embed, cluster and review animal vocalisations"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--project", c.project, "Project directory")->capture_default_str();
  app.add_option("--params", c.params_file, "Parameters JSON (default: <project>/params.json)");
  app.add_option("--threads", c.threads,
                 "Worker threads (default: $KANTO_THREADS or all cores); bench accepts a list such as 1,2,8");
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--song-level", c.song_level, "Embed one row per song (true) or per unit (false)");
  app.add_flag("--json", c.json, "Machine-readable output");

  bool sample = false;
  auto* init = app.add_subcommand("init", "Create the project layout and params.json");
  init->add_flag("--sample", sample, "Also write a 20-song synthetic sample to data/raw/sample");

  app.add_subcommand("ingest", "Catalogue WAV files and their JSON sidecars");
  app.add_subcommand("segment", "Compute spectrograms and find units");

  std::string method = "pca";
  std::size_t neighbors = 15;
  auto* embed = app.add_subcommand("embed", "Embed units or songs per individual");
  embed->add_option("--method", method, "pca | neighbor")->check(CLI::IsMember({"pca", "neighbor"}))->capture_default_str();
  embed->add_option("--neighbors", neighbors, "Neighbourhood size for --method neighbor")->capture_default_str();

  bool global = false;
  auto* cluster = app.add_subcommand("cluster", "Assign automatic cluster labels");
  cluster->add_flag("--global", global, "Cluster all individuals together");

  std::string host = "127.0.0.1", ui_dir;
  int port = 8765;
  auto* appcmd = app.add_subcommand("app", "Serve the label review API and UI");
  appcmd->add_option("--host", host)->capture_default_str();
  appcmd->add_option("--port", port)->capture_default_str();
  appcmd->add_option("--ui-dir", ui_dir, "Static UI bundle to serve");

  double split = 0.8;
  auto* exp = app.add_subcommand("export", "Write the stratified train/test tree");
  exp->add_option("--split", split, "Training fraction")->capture_default_str();

  std::string sim_out;
  auto* sim = app.add_subcommand("similarity", "Song similarity and cross-year re-identification");
  sim->add_option("--out", sim_out, "Report directory (default: <project>/output/similarity)");

  std::size_t bench_units = 20000, scale_units = 556472;
  std::string bench_threads = "1,2,8";
  auto* bench = app.add_subcommand("bench", "Synthetic segmentation throughput");
  bench->add_option("--units", bench_units)->capture_default_str();
  bench->add_option("--scale-units", scale_units, "Unit count to project the wall time to")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, c.json, "validation", e.what());
    return exit_status(ErrorCode::validation);
  }

  try {
    if (bench->parsed()) {
      if (!c.threads.empty()) bench_threads = c.threads;
      return cmd_bench(c, out, bench_units, bench_threads, scale_units);
    }
    const Context ctx = make_context(c, out);
    if (init->parsed()) return cmd_init(ctx, sample);
    if (app.got_subcommand("ingest")) return cmd_ingest(ctx);
    if (app.got_subcommand("segment")) return cmd_segment(ctx);
    if (embed->parsed()) return cmd_embed(ctx, method, neighbors);
    if (cluster->parsed()) return cmd_cluster(ctx, global);
    if (appcmd->parsed()) return cmd_app(ctx, host, port, ui_dir);
    if (exp->parsed()) return cmd_export(ctx, split);
    if (sim->parsed()) return cmd_similarity(ctx, sim_out);
  } catch (const Error& e) {
    print_error(err, c.json, to_string(e.code()), e.what());
    return exit_status(e.code());
  } catch (const fs::filesystem_error& e) {
    print_error(err, c.json, "io", e.what());
    return exit_status(ErrorCode::io);
  } catch (const std::exception& e) {
    print_error(err, c.json, "internal", e.what());
    return exit_status(ErrorCode::internal);
  }
  return exit_status(ErrorCode::internal);
}

}  // namespace kanto::cli
