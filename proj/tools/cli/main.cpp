// Command-line front end for the video token pruning library. Every
// subcommand talks to the public C API; `oracle` additionally cross-checks
// the fast paths against the brute-force references.

#include <tango/tango.h>

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "refimpl.hpp"

using nlohmann::json;

namespace {

[[noreturn]] void die(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(1);
}

void check_ok(tango_status s, const std::string& what) {
  if (s != TANGO_OK) die(what + ": " + tango_last_error());
}

template <typename T>
T* expect(T* p, const std::string& what) {
  if (!p) die(what + ": " + tango_last_error());
  return p;
}

struct GridDel { void operator()(tango_grid* p) const { tango_grid_free(p); } };
struct AttnDel { void operator()(tango_attention* p) const { tango_attention_free(p); } };
struct PlanDel { void operator()(tango_segment_plan* p) const { tango_segment_plan_free(p); } };
struct SalDel { void operator()(tango_salient* p) const { tango_salient_free(p); } };
struct ClusDel { void operator()(tango_cluster_result* p) const { tango_cluster_result_free(p); } };
struct PrunedDel { void operator()(tango_pruned* p) const { tango_pruned_free(p); } };
struct RopeDel { void operator()(tango_rope* p) const { tango_rope_free(p); } };

using GridPtr = std::unique_ptr<tango_grid, GridDel>;
using AttnPtr = std::unique_ptr<tango_attention, AttnDel>;
using PlanPtr = std::unique_ptr<tango_segment_plan, PlanDel>;
using SalPtr = std::unique_ptr<tango_salient, SalDel>;
using ClusPtr = std::unique_ptr<tango_cluster_result, ClusDel>;
using PrunedPtr = std::unique_ptr<tango_pruned, PrunedDel>;
using RopePtr = std::unique_ptr<tango_rope, RopeDel>;

// --- small parsing helpers ---------------------------------------------------

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

double parse_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    die(ctx + ": '" + s + "' is not a number");
  }
}

unsigned long parse_ulong(const std::string& s, const std::string& ctx) {
  try {
    std::size_t used = 0;
    unsigned long v = std::stoul(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    die(ctx + ": '" + s + "' is not a non-negative integer");
  }
}

bool parse_bool(const std::string& s, const std::string& ctx) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  die(ctx + ": '" + s + "' is not a boolean");
}

std::vector<std::uint32_t> parse_u32_list(const std::string& s, const std::string& ctx) {
  std::vector<std::uint32_t> out;
  if (trim(s).empty()) return out;
  for (const std::string& p : split_csv(s))
    out.push_back(static_cast<std::uint32_t>(parse_ulong(p, ctx)));
  return out;
}

// key = value per line; '#' starts a comment.
std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) die("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      die(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) die(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = val;
  }
  return kv;
}

// Applies flags > config file > defaults: a key from the map only lands when
// the corresponding flag was absent on the command line.
struct Resolver {
  const CLI::App& cmd;
  std::map<std::string, std::string> kv;

  bool pending(const char* flag, const char* key) const {
    return cmd.count(flag) == 0 && kv.count(key) > 0;
  }
  void num(const char* flag, const char* key, double& v) const {
    if (pending(flag, key)) v = parse_double(kv.at(key), key);
  }
  void unum(const char* flag, const char* key, unsigned& v) const {
    if (pending(flag, key)) v = static_cast<unsigned>(parse_ulong(kv.at(key), key));
  }
  void str(const char* flag, const char* key, std::string& v) const {
    if (pending(flag, key)) v = kv.at(key);
  }
  // `inverted` covers --no-x flags backed by an x = true/false config key.
  void boolean(const char* flag, const char* key, bool& v, bool inverted) const {
    if (pending(flag, key)) {
      bool b = parse_bool(kv.at(key), key);
      v = inverted ? !b : b;
    }
  }
};

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) die("failed to write " + path);
}

GridPtr load_grid_cli(const std::string& path) {
  if (path.empty()) die("no input grid given");
  return GridPtr(expect(tango_grid_load(path.c_str()), "loading " + path));
}

// spec is either a .ta path or the literal "global-query".
AttnPtr resolve_attention(const tango_grid* grid, const std::string& spec) {
  if (spec == "global-query")
    return AttnPtr(expect(tango_global_query_scores(grid), "computing global-query scores"));
  AttnPtr attn(expect(tango_attention_load(spec.c_str()), "loading " + spec));
  if (tango_attention_frames(attn.get()) != tango_grid_frames(grid) ||
      tango_attention_per_frame(attn.get()) !=
          tango_grid_height(grid) * tango_grid_width(grid))
    die("attention shape does not match the grid");
  return attn;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Deterministic golden-angle palette; distinct for every small label count.
void label_color(std::uint32_t label, unsigned char rgb[3]) {
  double hue = std::fmod(static_cast<double>(label) * 137.50776405003785, 360.0) / 60.0;
  int sector = static_cast<int>(hue) % 6;
  double f = hue - std::floor(hue);
  const double s = 0.72, v = 0.95;
  double p = v * (1.0 - s), q = v * (1.0 - s * f), t = v * (1.0 - s * (1.0 - f));
  double r, g, b;
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  rgb[0] = static_cast<unsigned char>(std::lround(255.0 * r));
  rgb[1] = static_cast<unsigned char>(std::lround(255.0 * g));
  rgb[2] = static_cast<unsigned char>(std::lround(255.0 * b));
}

// --- prune --------------------------------------------------------------------

struct PruneArgs {
  std::string input;
  std::string out_prefix;
  std::string attn = "global-query";
  std::string config_path;
  std::string manifest_path;
  std::string sinks;
  std::string strategy = "tango";
  std::string rope_dims;  // "t,h,w"; empty = default partition of dim
  double retention = 0.10;
  double tau = 0.0;  // <= 0 derives from retention
  double alpha = 1.5;
  double split = 0.6;
  double theta_t = 1e4;
  double theta_s = 1e3;
  unsigned knn = 7;
  unsigned max_seg_len = 0;
  bool no_dist_st = false;
  bool no_tsa = false;
  bool budget_from_survivors = false;
};

std::map<std::string, std::string> manifest_to_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) die("cannot open manifest " + path);
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    die(path + ": " + e.what());
  }
  std::map<std::string, std::string> kv;
  if (m.contains("input")) kv["input"] = m["input"].get<std::string>();
  if (m.contains("attn")) kv["attn"] = m["attn"].get<std::string>();
  if (m.contains("prefix")) kv["out"] = m["prefix"].get<std::string>();
  if (!m.contains("options")) return kv;
  const json& o = m["options"];
  auto join = [](const json& arr) {
    std::string s;
    for (const json& v : arr) {
      if (!s.empty()) s += ',';
      s += v.dump();
    }
    return s;
  };
  if (o.contains("retention")) kv["retention"] = o["retention"].dump();
  if (o.contains("tau")) kv["tau"] = o["tau"].dump();
  if (o.contains("alpha")) kv["alpha"] = o["alpha"].dump();
  if (o.contains("split")) kv["split"] = o["split"].dump();
  if (o.contains("knn")) kv["knn"] = o["knn"].dump();
  if (o.contains("max_segment_len")) kv["max-seg-len"] = o["max_segment_len"].dump();
  if (o.contains("strategy")) kv["strategy"] = o["strategy"].get<std::string>();
  if (o.contains("sinks")) kv["sinks"] = join(o["sinks"]);
  if (o.contains("rope_dims")) kv["rope-dims"] = join(o["rope_dims"]);
  if (o.contains("rope_bases") && o["rope_bases"].is_array() && o["rope_bases"].size() == 3) {
    kv["theta-t"] = o["rope_bases"][0].dump();
    kv["theta-s"] = o["rope_bases"][1].dump();
  }
  if (o.contains("dist_st")) kv["dist-st"] = o["dist_st"].get<bool>() ? "true" : "false";
  if (o.contains("timestamp_aligned"))
    kv["timestamp-aligned"] = o["timestamp_aligned"].get<bool>() ? "true" : "false";
  if (o.contains("budget_from_survivors"))
    kv["budget-from-survivors"] = o["budget_from_survivors"].get<bool>() ? "true" : "false";
  return kv;
}

int cmd_prune(PruneArgs& a, const CLI::App& cmd) {
  if (!a.config_path.empty() && !a.manifest_path.empty())
    die("--config and --from-manifest are mutually exclusive");
  Resolver res{cmd, {}};
  if (!a.config_path.empty()) res.kv = parse_kv_file(a.config_path);
  if (!a.manifest_path.empty()) res.kv = manifest_to_kv(a.manifest_path);
  res.str("input", "input", a.input);
  res.str("--out", "out", a.out_prefix);
  res.str("--attn", "attn", a.attn);
  res.str("--sinks", "sinks", a.sinks);
  res.str("--strategy", "strategy", a.strategy);
  res.str("--rope-dims", "rope-dims", a.rope_dims);
  res.num("--retention", "retention", a.retention);
  res.num("--tau", "tau", a.tau);
  res.num("--alpha", "alpha", a.alpha);
  res.num("--split", "split", a.split);
  res.num("--theta-t", "theta-t", a.theta_t);
  res.num("--theta-s", "theta-s", a.theta_s);
  res.unum("--knn", "knn", a.knn);
  res.unum("--max-seg-len", "max-seg-len", a.max_seg_len);
  res.boolean("--no-dist-st", "dist-st", a.no_dist_st, true);
  res.boolean("--no-tsa", "timestamp-aligned", a.no_tsa, true);
  res.boolean("--budget-from-survivors", "budget-from-survivors", a.budget_from_survivors,
              false);

  if (a.out_prefix.empty()) die("--out PREFIX is required");
  if (a.strategy != "tango" && a.strategy != "uniform" && a.strategy != "topk")
    die("unknown strategy '" + a.strategy + "' (expected tango, uniform, or topk)");
  std::vector<std::uint32_t> sinks = parse_u32_list(a.sinks, "sinks");
  std::vector<std::uint32_t> rdims = parse_u32_list(a.rope_dims, "rope-dims");
  if (!rdims.empty() && rdims.size() != 3) die("rope-dims needs exactly three values");

  auto t_start = std::chrono::steady_clock::now();
  GridPtr grid = load_grid_cli(a.input);
  const std::uint64_t total = static_cast<std::uint64_t>(tango_grid_frames(grid.get())) *
                              tango_grid_height(grid.get()) * tango_grid_width(grid.get());
  const std::uint32_t dim = tango_grid_dim(grid.get());
  const std::uint32_t cells = tango_grid_height(grid.get()) * tango_grid_width(grid.get());
  double ms_load = ms_since(t_start);

  // Everything is computed before the first byte lands on disk, so a
  // validation failure leaves no partial outputs behind.
  auto t_pipe = std::chrono::steady_clock::now();
  std::vector<float> out_feats;
  std::vector<tango_position3d> out_pos;
  std::vector<const char*> out_prov;
  std::vector<std::uint32_t> out_src;
  tango_prune_audit audit{};
  bool have_full_audit = false;
  const bool tsa = !a.no_tsa;

  if (a.strategy == "tango") {
    tango_prune_options opts;
    tango_prune_options_init(&opts);
    opts.retention = a.retention;
    opts.tau = a.tau;
    opts.alpha = a.alpha;
    opts.split = a.split;
    opts.knn_k = a.knn;
    opts.max_segment_len = a.max_seg_len;
    if (!rdims.empty()) {
      opts.rope_dims[0] = rdims[0];
      opts.rope_dims[1] = rdims[1];
      opts.rope_dims[2] = rdims[2];
    }
    opts.rope_bases[0] = a.theta_t;
    opts.rope_bases[1] = a.theta_s;
    opts.rope_bases[2] = a.theta_s;
    if (!sinks.empty()) {
      opts.sink_indices = sinks.data();
      opts.sink_count = sinks.size();
    }
    opts.use_dist_st = a.no_dist_st ? 0 : 1;
    opts.timestamp_aligned = tsa ? 1 : 0;
    opts.budget_from_survivors = a.budget_from_survivors ? 1 : 0;

    AttnPtr attn;
    if (a.attn != "global-query") attn = resolve_attention(grid.get(), a.attn);
    PrunedPtr pruned(expect(tango_prune(grid.get(), attn.get(), &opts), "prune"));
    tango_pruned_audit(pruned.get(), &audit);
    have_full_audit = true;
    std::size_t n = tango_pruned_count(pruned.get());
    const float* feats = tango_pruned_features(pruned.get());
    out_feats.assign(feats, feats + n * dim);
    out_pos.resize(n);
    out_prov.resize(n);
    out_src.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out_pos[i] = tango_pruned_position(pruned.get(), i);
      switch (tango_pruned_provenance(pruned.get(), i)) {
        case TANGO_PROV_SALIENT: out_prov[i] = "salient"; break;
        case TANGO_PROV_MERGED: out_prov[i] = "merged"; break;
        default: out_prov[i] = "pooled_static"; break;
      }
      out_src[i] = tango_pruned_source_count(pruned.get(), i);
    }
  } else {
    if (!(a.retention > 0.0 && a.retention <= 1.0)) die("retention must be in (0, 1]");
    std::uint64_t budget = static_cast<std::uint64_t>(std::llround(a.retention * total));
    if (budget > total) budget = total;
    if (budget == 0) die("retention yields an empty budget");
    std::vector<std::size_t> keep(budget);
    if (a.strategy == "uniform") {
      check_ok(tango_uniform_sample(total, budget, keep.data()), "uniform sampling");
    } else {
      AttnPtr attn = resolve_attention(grid.get(), a.attn);
      const float* s = tango_attention_scores(attn.get());
      std::vector<float> masked(s, s + total);
      for (std::uint32_t sink : sinks) {
        if (sink >= cells) die("sink index " + std::to_string(sink) + " out of range");
        for (std::uint32_t f = 0; f < tango_grid_frames(grid.get()); ++f)
          masked[static_cast<std::size_t>(f) * cells + sink] = -INFINITY;
      }
      check_ok(tango_topk(masked.data(), total, budget, keep.data()), "top-k selection");
      std::sort(keep.begin(), keep.end());
    }
    const float* data = tango_grid_data(grid.get());
    out_feats.reserve(keep.size() * dim);
    for (std::size_t id : keep) {
      out_feats.insert(out_feats.end(), data + id * dim, data + (id + 1) * dim);
      out_pos.push_back(tango_grid_position(grid.get(), static_cast<std::uint32_t>(id / cells),
                                            static_cast<std::uint32_t>(id % cells), tsa));
      out_prov.push_back("salient");
      out_src.push_back(1);
    }
    audit.input_tokens = total;
    audit.budget = budget;
    audit.salient_out = budget;
  }
  double ms_pipe = ms_since(t_pipe);

  // Kept tokens ride out as a 1 x 1 x n grid; the companion CSVs carry the
  // original coordinates and provenance.
  auto t_write = std::chrono::steady_clock::now();
  std::size_t n_out = out_pos.size();
  std::vector<float> zero_ts{0.0f};
  GridPtr out_grid(expect(
      tango_grid_create(1, 1, static_cast<std::uint32_t>(n_out), dim, out_feats.data(),
                        zero_ts.data()),
      "assembling output grid"));
  std::string grid_path = a.out_prefix + ".tg";
  std::string pos_path = a.out_prefix + ".positions.csv";
  std::string prov_path = a.out_prefix + ".provenance.csv";
  std::string man_path = a.out_prefix + ".manifest.json";
  check_ok(tango_grid_save(out_grid.get(), grid_path.c_str()), "writing " + grid_path);

  std::string pos_csv = "index,t,h,w\n";
  std::string prov_csv = "index,provenance,source_count\n";
  char line[128];
  for (std::size_t i = 0; i < n_out; ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%" PRId32 ",%" PRId32 "\n", i, out_pos[i].t,
                  out_pos[i].h, out_pos[i].w);
    pos_csv += line;
    std::snprintf(line, sizeof line, "%zu,%s,%" PRIu32 "\n", i, out_prov[i], out_src[i]);
    prov_csv += line;
  }
  write_text(pos_path, pos_csv);
  write_text(prov_path, prov_csv);

  json man;
  man["command"] = "prune";
  man["version"] = tango_version();
  man["input"] = a.input;
  man["attn"] = a.attn;
  man["prefix"] = a.out_prefix;
  man["options"] = {
      {"retention", a.retention},
      {"tau", a.tau},
      {"tau_effective", a.tau > 0.0 ? a.tau : (a.retention <= 0.1 ? 0.65 : 0.8)},
      {"alpha", a.alpha},
      {"split", a.split},
      {"knn", a.knn},
      {"max_segment_len", a.max_seg_len},
      {"strategy", a.strategy},
      {"sinks", sinks},
      {"rope_dims", rdims.empty() ? std::vector<std::uint32_t>{0, 0, 0} : rdims},
      {"rope_bases", std::vector<double>{a.theta_t, a.theta_s, a.theta_s}},
      {"dist_st", !a.no_dist_st},
      {"timestamp_aligned", tsa},
      {"budget_from_survivors", a.budget_from_survivors},
  };
  man["outputs"] = {{"grid", grid_path}, {"positions", pos_path}, {"provenance", prov_path}};
  man["counts"] = {{"input_tokens", total}, {"output_tokens", n_out}};
  json ja = {{"input_tokens", audit.input_tokens}, {"budget", audit.budget},
             {"salient_out", audit.salient_out}};
  if (have_full_audit) {
    ja["k_salient"] = audit.k_salient;
    ja["k_merge"] = audit.k_merge;
    ja["survivors"] = audit.survivors;
    ja["merged_out"] = audit.merged_out;
    ja["segments"] = audit.segments;
    ja["static_pooled"] = audit.static_pooled;
  }
  man["audit"] = ja;
  man["timings_ms"] = {{"load", ms_load}, {"pipeline", ms_pipe},
                       {"write", ms_since(t_write)}};
  write_text(man_path, man.dump(2) + "\n");

  std::uint64_t n_sal = 0, n_mrg = 0, n_pool = 0;
  for (const char* p : out_prov) {
    if (std::strcmp(p, "salient") == 0)
      ++n_sal;
    else if (std::strcmp(p, "merged") == 0)
      ++n_mrg;
    else
      ++n_pool;
  }
  std::printf("kept %zu of %" PRIu64 " tokens (salient %" PRIu64 ", merged %" PRIu64
              ", pooled_static %" PRIu64 ")\n",
              n_out, total, n_sal, n_mrg, n_pool);
  std::printf("wrote %s, %s, %s, %s\n", grid_path.c_str(), pos_path.c_str(), prov_path.c_str(),
              man_path.c_str());
  return 0;
}

// --- segment -------------------------------------------------------------------

int cmd_segment(const std::string& input, double tau, unsigned max_seg_len) {
  GridPtr grid = load_grid_cli(input);
  PlanPtr plan(expect(tango_segment(grid.get(), tau, max_seg_len), "segmenting"));
  std::printf("# t_s t_e n_static prunable\n");
  for (std::size_t i = 0; i < tango_segment_count(plan.get()); ++i) {
    std::uint32_t t_s = 0, t_e = 0;
    std::uint64_t n_static = 0, prunable = 0;
    check_ok(tango_segment_at(plan.get(), i, &t_s, &t_e, &n_static, &prunable), "segment_at");
    std::printf("%" PRIu32 " %" PRIu32 " %" PRIu64 " %" PRIu64 "\n", t_s, t_e, n_static,
                prunable);
  }
  std::printf("total %" PRIu64 " prunable over %zu segments\n",
              tango_segment_total_prunable(plan.get()), tango_segment_count(plan.get()));
  return 0;
}

// --- select ----------------------------------------------------------------------

struct SelectArgs {
  std::string input, attn = "global-query", sinks, rope_dims, out;
  unsigned k = 8, knn = 7;
  double alpha = 1.5, theta_t = 1e4, theta_s = 1e3;
  bool no_dist_st = false, no_tsa = false;
};

int cmd_select(const SelectArgs& a) {
  GridPtr grid = load_grid_cli(a.input);
  AttnPtr attn;
  if (a.attn != "global-query") attn = resolve_attention(grid.get(), a.attn);
  std::vector<std::uint32_t> sinks = parse_u32_list(a.sinks, "sinks");
  std::vector<std::uint32_t> rdims = parse_u32_list(a.rope_dims, "rope-dims");
  if (!rdims.empty() && rdims.size() != 3) die("rope-dims needs exactly three values");
  double bases[3] = {a.theta_t, a.theta_s, a.theta_s};
  SalPtr sel(expect(
      tango_select(grid.get(), attn.get(), a.k, a.alpha, a.knn,
                   sinks.empty() ? nullptr : sinks.data(), sinks.size(), a.no_dist_st ? 0 : 1,
                   rdims.empty() ? nullptr : rdims.data(), bases, a.no_tsa ? 0 : 1),
      "selection"));
  const std::uint32_t cells = tango_grid_height(grid.get()) * tango_grid_width(grid.get());
  std::string csv = "index,frame,cell,cluster\n";
  char line[96];
  for (std::size_t i = 0; i < tango_salient_count(sel.get()); ++i) {
    std::size_t id = tango_salient_indices(sel.get())[i];
    std::snprintf(line, sizeof line, "%zu,%zu,%zu,%" PRIu32 "\n", id, id / cells, id % cells,
                  tango_salient_clusters(sel.get())[i]);
    csv += line;
  }
  if (a.out.empty())
    std::fputs(csv.c_str(), stdout);
  else {
    write_text(a.out, csv);
    std::printf("wrote %s (%zu tokens)\n", a.out.c_str(), tango_salient_count(sel.get()));
  }
  return 0;
}

// --- cluster ----------------------------------------------------------------------

struct ClusterArgs {
  std::string input, rope_dims, out;
  unsigned k = 4, knn = 7, frame = 0;
  double theta_t = 1e4, theta_s = 1e3;
  bool euclidean = false, no_tsa = false;
};

int cmd_cluster(const ClusterArgs& a) {
  GridPtr grid = load_grid_cli(a.input);
  if (a.frame >= tango_grid_frames(grid.get())) die("frame out of range");
  const std::uint32_t cells = tango_grid_height(grid.get()) * tango_grid_width(grid.get());
  const std::uint32_t dim = tango_grid_dim(grid.get());
  const float* feats = tango_grid_data(grid.get()) +
                       static_cast<std::size_t>(a.frame) * cells * dim;
  RopePtr rope;
  std::vector<tango_position3d> pos;
  if (!a.euclidean) {
    std::vector<std::uint32_t> rdims = parse_u32_list(a.rope_dims, "rope-dims");
    if (!rdims.empty() && rdims.size() != 3) die("rope-dims needs exactly three values");
    double bases[3] = {a.theta_t, a.theta_s, a.theta_s};
    rope.reset(expect(tango_rope_create(dim, rdims.empty() ? nullptr : rdims.data(), bases),
                      "building rotary embedding"));
    pos.resize(cells);
    for (std::uint32_t c = 0; c < cells; ++c)
      pos[c] = tango_grid_position(grid.get(), a.frame, c, a.no_tsa ? 0 : 1);
  }
  ClusPtr result(expect(tango_cluster(feats, cells, dim, a.k, a.knn,
                                      pos.empty() ? nullptr : pos.data(), rope.get()),
                        "clustering"));
  std::string csv = "# centers:";
  for (std::size_t i = 0; i < tango_cluster_k(result.get()); ++i)
    csv += " " + std::to_string(tango_cluster_centers(result.get())[i]);
  csv += "\ncell,label\n";
  char line[64];
  for (std::uint32_t c = 0; c < cells; ++c) {
    std::snprintf(line, sizeof line, "%" PRIu32 ",%" PRIu32 "\n", c,
                  tango_cluster_assignment(result.get())[c]);
    csv += line;
  }
  if (a.out.empty())
    std::fputs(csv.c_str(), stdout);
  else {
    write_text(a.out, csv);
    std::printf("wrote %s\n", a.out.c_str());
  }
  return 0;
}

// --- flops -----------------------------------------------------------------------

struct FlopsArgs {
  std::string model_config;
  std::uint64_t seq = 6272;
  double retention = 0.10;
  unsigned intra_layer = 0;  // 0 = flat schedule
  double intra_ratio = 0.5;
};

int cmd_flops(const FlopsArgs& a) {
  tango_model_config cfg;
  tango_model_config_qwen2_7b(&cfg);
  if (!a.model_config.empty()) {
    std::map<std::string, std::string> kv = parse_kv_file(a.model_config);
    for (const auto& [key, val] : kv) {
      std::uint64_t v = parse_ulong(val, key);
      if (key == "layers")
        cfg.layers = v;
      else if (key == "hidden")
        cfg.hidden = v;
      else if (key == "ffn")
        cfg.ffn = v;
      else if (key == "query_heads")
        cfg.query_heads = v;
      else if (key == "kv_groups")
        cfg.kv_groups = v;
      else
        die("unknown model config key '" + key + "'");
    }
  }
  // Uniform retention everywhere, optionally dropping to retention * ratio
  // from the given 0-based layer onward.
  std::vector<double> schedule(cfg.layers, a.retention);
  if (a.intra_layer > 0)
    for (std::uint64_t l = a.intra_layer; l < cfg.layers; ++l)
      schedule[l] = a.retention * a.intra_ratio;
  char buf[8192];
  check_ok(tango_flops_report(a.seq, &cfg, schedule.data(), schedule.size(), buf, sizeof buf),
           "cost model");
  std::fputs(buf, stdout);
  return 0;
}

// --- synth -----------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  tango_synth_spec spec;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  if (a.out.empty()) die("--out PREFIX is required");
  tango_grid* grid = nullptr;
  tango_attention* attn = nullptr;
  check_ok(tango_synth(&a.spec, a.seed, &grid, &attn), "synthesizing");
  GridPtr g(grid);
  AttnPtr at(attn);
  std::string grid_path = a.out + ".tg";
  std::string attn_path = a.out + ".ta";
  check_ok(tango_grid_save(g.get(), grid_path.c_str()), "writing " + grid_path);
  check_ok(tango_attention_save(at.get(), attn_path.c_str()), "writing " + attn_path);
  std::printf("wrote %s (%" PRIu32 " x %" PRIu32 " x %" PRIu32 " x %" PRIu32 ") and %s\n",
              grid_path.c_str(), a.spec.frames, a.spec.grid_h, a.spec.grid_w, a.spec.dim,
              attn_path.c_str());
  return 0;
}

// --- viz -------------------------------------------------------------------------

struct VizArgs {
  std::string input, out, attn = "global-query", sinks, rope_dims;
  unsigned k = 4, knn = 7, scale = 16;
  double theta_t = 1e4, theta_s = 1e3;
  bool euclidean = false, no_tsa = false;
};

int cmd_viz(const VizArgs& a) {
  if (a.out.empty()) die("--out PREFIX is required");
  if (a.scale < 1 || a.scale > 64) die("--scale must be in [1, 64]");
  GridPtr grid = load_grid_cli(a.input);
  const std::uint32_t frames = tango_grid_frames(grid.get());
  const std::uint32_t gh = tango_grid_height(grid.get());
  const std::uint32_t gw = tango_grid_width(grid.get());
  const std::uint32_t cells = gh * gw;
  const std::uint32_t dim = tango_grid_dim(grid.get());
  std::vector<std::uint32_t> rdims = parse_u32_list(a.rope_dims, "rope-dims");
  if (!rdims.empty() && rdims.size() != 3) die("rope-dims needs exactly three values");
  RopePtr rope;
  if (!a.euclidean) {
    double bases[3] = {a.theta_t, a.theta_s, a.theta_s};
    rope.reset(expect(tango_rope_create(dim, rdims.empty() ? nullptr : rdims.data(), bases),
                      "building rotary embedding"));
  }

  // Cluster every frame before any file is opened.
  std::vector<std::vector<std::uint32_t>> labels(frames);
  for (std::uint32_t f = 0; f < frames; ++f) {
    const float* feats = tango_grid_data(grid.get()) + static_cast<std::size_t>(f) * cells * dim;
    std::vector<tango_position3d> pos;
    if (rope) {
      pos.resize(cells);
      for (std::uint32_t c = 0; c < cells; ++c)
        pos[c] = tango_grid_position(grid.get(), f, c, a.no_tsa ? 0 : 1);
    }
    ClusPtr result(expect(tango_cluster(feats, cells, dim, a.k, a.knn,
                                        pos.empty() ? nullptr : pos.data(), rope.get()),
                          "clustering frame " + std::to_string(f)));
    labels[f].assign(tango_cluster_assignment(result.get()),
                     tango_cluster_assignment(result.get()) + cells);
  }

  AttnPtr attn = resolve_attention(grid.get(), a.attn);
  std::vector<std::uint32_t> sinks = parse_u32_list(a.sinks, "sinks");
  const float* s = tango_attention_scores(attn.get());
  std::vector<float> masked(s, s + static_cast<std::size_t>(frames) * cells);
  for (std::uint32_t sink : sinks) {
    if (sink >= cells) die("sink index " + std::to_string(sink) + " out of range");
    for (std::uint32_t f = 0; f < frames; ++f)
      masked[static_cast<std::size_t>(f) * cells + sink] = -INFINITY;
  }
  std::sort(masked.begin(), masked.end(), std::greater<float>());

  for (std::uint32_t f = 0; f < frames; ++f) {
    const std::uint32_t W = gw * a.scale, H = gh * a.scale;
    std::string ppm = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
    std::string body(static_cast<std::size_t>(W) * H * 3, '\0');
    for (std::uint32_t y = 0; y < H; ++y)
      for (std::uint32_t x = 0; x < W; ++x) {
        unsigned char rgb[3];
        label_color(labels[f][(y / a.scale) * gw + (x / a.scale)], rgb);
        std::size_t off = (static_cast<std::size_t>(y) * W + x) * 3;
        body[off] = static_cast<char>(rgb[0]);
        body[off + 1] = static_cast<char>(rgb[1]);
        body[off + 2] = static_cast<char>(rgb[2]);
      }
    char name[32];
    std::snprintf(name, sizeof name, ".frame%04" PRIu32 ".ppm", f);
    write_text(a.out + name, ppm + body);
  }

  std::string csv = "rank,score\n";
  char line[64];
  for (std::size_t i = 0; i < masked.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.9g\n", i, static_cast<double>(masked[i]));
    csv += line;
  }
  write_text(a.out + ".scores.csv", csv);
  std::printf("wrote %" PRIu32 " frame images and %s.scores.csv\n", frames, a.out.c_str());
  return 0;
}

// --- oracle ------------------------------------------------------------------------
//
// Re-derives segmentation plans, cluster structures, and rotations through
// the brute-force references and reports any deviation. --inject-fault
// corrupts the first trial of each section to prove the checks can fail.

// Local generator, unrelated to the library's; it only drives fixtures.
struct CliRng {
  std::uint64_t s;
  explicit CliRng(std::uint64_t seed) : s(seed ^ 0x9E3779B97F4A7C15ULL) {
    for (int i = 0; i < 4; ++i) next();
  }
  std::uint64_t next() {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(next() % n); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct OracleArgs {
  std::uint64_t seed = 7;
  unsigned seg_trials = 120, cluster_trials = 40, rot_trials = 200;
  bool inject_fault = false;
};

bool oracle_segmentation(const OracleArgs& a) {
  CliRng rng(a.seed);
  const double taus[] = {0.55, 0.7, 0.8, 0.9, 0.97};
  unsigned mismatches = 0;
  std::string first;
  for (unsigned trial = 0; trial < a.seg_trials; ++trial) {
    std::uint32_t frames = 1 + rng.below(10);
    std::uint32_t gh = 1 + rng.below(3), gw = 1 + rng.below(3);
    std::uint32_t dim = 3 + rng.below(4);
    std::vector<float> data(static_cast<std::size_t>(frames) * gh * gw * dim);
    for (float& v : data) v = static_cast<float>(rng.below(4));
    std::vector<float> ts(frames);
    for (std::uint32_t t = 0; t < frames; ++t) ts[t] = 0.25f * static_cast<float>(t);
    double tau = taus[rng.below(5)];
    std::uint32_t cap = rng.below(2) ? rng.below(4) : 0;

    GridPtr grid(expect(tango_grid_create(frames, gh, gw, dim, data.data(), ts.data()),
                        "oracle grid"));
    PlanPtr plan(expect(tango_segment(grid.get(), tau, cap), "oracle segmentation"));
    refimpl::BruteSegmentation brute =
        refimpl::best_segmentation(data.data(), frames, gh * gw, dim, tau, cap);

    std::uint64_t fast_total = tango_segment_total_prunable(plan.get());
    if (a.inject_fault && trial == 0) fast_total += 1;
    bool ok = fast_total == brute.total_prunable &&
              tango_segment_count(plan.get()) == brute.starts.size();
    for (std::size_t i = 0; ok && i < brute.starts.size(); ++i) {
      std::uint32_t t_s = 0, t_e = 0;
      std::uint64_t n_static = 0, prunable = 0;
      check_ok(tango_segment_at(plan.get(), i, &t_s, &t_e, &n_static, &prunable), "segment_at");
      ok = t_s == brute.starts[i];
    }
    if (!ok) {
      ++mismatches;
      if (first.empty())
        first = "trial " + std::to_string(trial) + ": got " + std::to_string(fast_total) +
                " prunable, reference says " + std::to_string(brute.total_prunable);
    }
  }
  std::printf("segmentation: %s (%u trials, %u mismatches%s%s)\n",
              mismatches ? "FAIL" : "PASS", a.seg_trials, mismatches, first.empty() ? "" : "; ",
              first.c_str());
  return mismatches == 0;
}

bool oracle_clustering(const OracleArgs& a) {
  CliRng rng(a.seed + 1);
  const std::uint32_t dim = 6;
  RopePtr rope(expect(tango_rope_create(dim, nullptr, nullptr), "oracle rope"));
  unsigned mismatches = 0;
  std::string first;
  for (unsigned trial = 0; trial < a.cluster_trials; ++trial) {
    std::size_t n = 1 + rng.below(200);
    std::vector<float> feats(n * dim);
    for (float& v : feats) v = static_cast<float>(rng.below(9)) - 4.0f;
    std::size_t k = 1 + rng.below(static_cast<std::uint32_t>(std::min<std::size_t>(n, 10)));
    std::uint32_t knn = 1 + rng.below(12);
    bool spatio = (trial & 1) != 0;

    std::vector<tango_position3d> pos(n);
    for (std::size_t i = 0; i < n; ++i)
      pos[i] = {1.0 + rng.below(6), static_cast<std::int32_t>(1 + rng.below(8)),
                static_cast<std::int32_t>(1 + rng.below(8))};

    ClusPtr fast(expect(tango_cluster(feats.data(), n, dim, k, knn,
                                      spatio ? pos.data() : nullptr,
                                      spatio ? rope.get() : nullptr),
                        "oracle clustering"));

    refimpl::NaiveClusters naive;
    std::vector<float> metric;
    if (spatio) {
      // The library clusters unit-normalized, rotated copies of the
      // features; rebuild that matrix and hand it to the naive side.
      metric.resize(n * dim);
      std::vector<float> unit(dim);
      for (std::size_t i = 0; i < n; ++i) {
        const float* x = feats.data() + i * dim;
        double sq = 0.0;
        for (std::uint32_t c = 0; c < dim; ++c)
          sq += static_cast<double>(x[c]) * x[c];
        if (sq == 0.0) {
          std::copy(x, x + dim, unit.begin());
        } else {
          double inv = 1.0 / std::sqrt(sq);
          for (std::uint32_t c = 0; c < dim; ++c)
            unit[c] = static_cast<float>(x[c] * inv);
        }
        check_ok(tango_rope_rotate(rope.get(), unit.data(), dim, pos[i], metric.data() + i * dim),
                 "oracle rotation");
      }
      naive = refimpl::cluster(n, refimpl::euclidean(metric.data(), n, dim), k, knn);
    } else {
      naive = refimpl::cluster(n, refimpl::euclidean(feats.data(), n, dim), k, knn);
    }

    std::vector<std::size_t> fast_centers(tango_cluster_centers(fast.get()),
                                          tango_cluster_centers(fast.get()) + k);
    std::vector<std::uint32_t> fast_assign(tango_cluster_assignment(fast.get()),
                                           tango_cluster_assignment(fast.get()) + n);
    if (a.inject_fault && trial == 0 && !fast_assign.empty()) fast_assign[0] ^= 1u;
    if (fast_centers != naive.centers || fast_assign != naive.assignment) {
      ++mismatches;
      if (first.empty())
        first = "trial " + std::to_string(trial) + " (n=" + std::to_string(n) +
                (spatio ? ", dist_st)" : ", euclidean)");
    }
  }
  std::printf("clustering: %s (%u trials over both metrics, %u mismatches%s%s)\n",
              mismatches ? "FAIL" : "PASS", a.cluster_trials, mismatches,
              first.empty() ? "" : "; ", first.c_str());
  return mismatches == 0;
}

bool oracle_rotation(const OracleArgs& a) {
  CliRng rng(a.seed + 2);
  const std::uint32_t dims[] = {6, 12, 24, 48};
  unsigned mismatches = 0;
  double worst = 0.0;
  std::string first;
  for (unsigned trial = 0; trial < a.rot_trials; ++trial) {
    std::uint32_t d = dims[rng.below(4)];
    double bases[3] = {1e4, 1e3, 1e3};
    if (rng.below(4) == 0) {
      bases[0] = 100.0 + rng.uniform() * 9900.0;
      bases[1] = bases[2] = 100.0 + rng.uniform() * 900.0;
    }
    RopePtr rope(expect(tango_rope_create(d, nullptr, bases), "oracle rope"));
    std::vector<float> x(d);
    for (float& v : x) v = static_cast<float>(rng.uniform() * 2.0 - 1.0);
    tango_position3d p{rng.uniform() * 40.0, static_cast<std::int32_t>(1 + rng.below(24)),
                       static_cast<std::int32_t>(1 + rng.below(24))};

    std::vector<float> fast(d);
    check_ok(tango_rope_rotate(rope.get(), x.data(), d, p, fast.data()), "oracle rotation");
    if (a.inject_fault && trial == 0) fast[0] = std::nextafterf(fast[0], 1e30f);

    // Default partition: two near-equal even spatial sections, remainder
    // to the temporal one.
    std::uint32_t e = 2 * (d / 6);
    refimpl::RopeSections sec{d - 2 * e, e, e, bases[0], bases[1], bases[2]};
    std::vector<float> direct = refimpl::rotate_direct(x.data(), sec, p.t, p.h, p.w);
    double dev = 0.0;
    for (std::uint32_t c = 0; c < d; ++c)
      dev = std::max(dev, std::fabs(static_cast<double>(fast[c]) - direct[c]));
    worst = std::max(worst, dev);
    if (std::memcmp(fast.data(), direct.data(), d * sizeof(float)) != 0) {
      ++mismatches;
      if (first.empty())
        first = "trial " + std::to_string(trial) + " (d=" + std::to_string(d) +
                ", max deviation " + std::to_string(dev) + ")";
    }
  }
  std::printf("rotation: %s (%u trials, %u mismatches, max deviation %.3g%s%s)\n",
              mismatches ? "FAIL" : "PASS", a.rot_trials, mismatches, worst,
              first.empty() ? "" : "; ", first.c_str());
  return mismatches == 0;
}

int cmd_oracle(const OracleArgs& a) {
  bool ok = oracle_segmentation(a);
  ok = oracle_clustering(a) && ok;
  ok = oracle_rotation(a) && ok;
  std::printf("overall: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"video token pruning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tango_version());
  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "cap worker threads (0 = automatic; TANGO_THREADS also applies)");

  PruneArgs pa;
  CLI::App* prune = app.add_subcommand("prune", "run the full pruning pipeline");
  prune->add_option("input", pa.input, "input token grid (.tg)");
  prune->add_option("--out", pa.out_prefix, "output prefix for .tg/.csv/.manifest.json");
  prune->add_option("--retention", pa.retention, "kept fraction of tokens, in (0, 1]");
  prune->add_option("--tau", pa.tau, "static-similarity threshold; <= 0 derives from retention");
  prune->add_option("--alpha", pa.alpha, "candidate expansion factor, >= 1");
  prune->add_option("--split", pa.split, "salient share of the budget");
  prune->add_option("--knn", pa.knn, "neighbors for the density estimate");
  prune->add_option("--max-seg-len", pa.max_seg_len, "frames per segment cap (0 = unbounded)");
  prune->add_option("--sinks,--sink-indices", pa.sinks, "comma-separated per-frame sink cells");
  prune->add_option("--strategy", pa.strategy, "tango, uniform, or topk");
  prune->add_option("--attn,--attn-file", pa.attn, "attention file (.ta) or 'global-query'");
  prune->add_option("--rope-dims", pa.rope_dims, "t,h,w section widths (default: derived)");
  prune->add_option("--theta-t", pa.theta_t, "temporal base frequency");
  prune->add_option("--theta-s", pa.theta_s, "spatial base frequency");
  prune->add_flag("--no-dist-st", pa.no_dist_st, "cluster candidates by plain Euclidean");
  prune->add_flag("--no-tsa", pa.no_tsa, "use frame indices instead of timestamps");
  prune->add_flag("--budget-from-survivors", pa.budget_from_survivors,
                  "base the budget on the post-segmentation count");
  prune->add_option("--config", pa.config_path, "key = value defaults file");
  prune->add_option("--from-manifest", pa.manifest_path, "re-run a recorded invocation");

  std::string seg_input;
  double seg_tau = 0.8;
  unsigned seg_cap = 0;
  CLI::App* seg = app.add_subcommand("segment", "print the optimal temporal segmentation");
  seg->add_option("input", seg_input, "input token grid (.tg)")->required();
  seg->add_option("--tau", seg_tau, "static-similarity threshold");
  seg->add_option("--max-seg-len", seg_cap, "frames per segment cap (0 = unbounded)");

  SelectArgs sa;
  CLI::App* sel = app.add_subcommand("select", "pick diverse salient tokens");
  sel->add_option("input", sa.input, "input token grid (.tg)")->required();
  sel->add_option("--k", sa.k, "number of tokens to select");
  sel->add_option("--alpha", sa.alpha, "candidate expansion factor");
  sel->add_option("--knn", sa.knn, "neighbors for the density estimate");
  sel->add_option("--attn,--attn-file", sa.attn, "attention file (.ta) or 'global-query'");
  sel->add_option("--sinks,--sink-indices", sa.sinks, "comma-separated per-frame sink cells");
  sel->add_option("--rope-dims", sa.rope_dims, "t,h,w section widths");
  sel->add_option("--theta-t", sa.theta_t, "temporal base frequency");
  sel->add_option("--theta-s", sa.theta_s, "spatial base frequency");
  sel->add_flag("--no-dist-st", sa.no_dist_st, "cluster candidates by plain Euclidean");
  sel->add_flag("--no-tsa", sa.no_tsa, "use frame indices instead of timestamps");
  sel->add_option("--out", sa.out, "CSV path (default: stdout)");

  ClusterArgs ca;
  CLI::App* clus = app.add_subcommand("cluster", "cluster one frame's tokens");
  clus->add_option("input", ca.input, "input token grid (.tg)")->required();
  clus->add_option("--k", ca.k, "cluster count");
  clus->add_option("--knn", ca.knn, "neighbors for the density estimate");
  clus->add_option("--frame", ca.frame, "0-based frame to cluster");
  clus->add_flag("--euclidean", ca.euclidean, "raw Euclidean metric instead of dist_st");
  clus->add_option("--rope-dims", ca.rope_dims, "t,h,w section widths");
  clus->add_option("--theta-t", ca.theta_t, "temporal base frequency");
  clus->add_option("--theta-s", ca.theta_s, "spatial base frequency");
  clus->add_flag("--no-tsa", ca.no_tsa, "use frame indices instead of timestamps");
  clus->add_option("--out", ca.out, "CSV path (default: stdout)");

  FlopsArgs fa;
  CLI::App* flops = app.add_subcommand("flops", "transformer cost model report");
  flops->add_option("--seq", fa.seq, "full sequence length");
  flops->add_option("--retention", fa.retention, "retention before the switch layer");
  flops->add_option("--intra-layer", fa.intra_layer,
                    "0-based layer where retention drops (0 = never)");
  flops->add_option("--intra-ratio", fa.intra_ratio, "retention multiplier after the switch");
  flops->add_option("--model-config", fa.model_config,
                    "key = value file: layers, hidden, ffn, query_heads, kv_groups");

  SynthArgs ya;
  tango_synth_spec_init(&ya.spec);
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic grid and attention map");
  synth->add_option("--out", ya.out, "output prefix for .tg/.ta")->required();
  synth->add_option("--frames", ya.spec.frames, "frame count");
  synth->add_option("--height", ya.spec.grid_h, "grid height");
  synth->add_option("--width", ya.spec.grid_w, "grid width");
  synth->add_option("--dim", ya.spec.dim, "feature dimension");
  synth->add_option("--blobs", ya.spec.n_blobs, "moving blob count");
  synth->add_option("--amplitude", ya.spec.amplitude, "blob cells traveled per frame");
  synth->add_option("--sigma", ya.spec.noise_sigma, "per-component gaussian noise");
  synth->add_option("--blob-size", ya.spec.blob_size, "square blob footprint side");
  synth->add_option("--seed", ya.seed, "generator seed");

  VizArgs va;
  CLI::App* viz = app.add_subcommand("viz", "render cluster maps and a score curve");
  viz->add_option("input", va.input, "input token grid (.tg)")->required();
  viz->add_option("--out", va.out, "output prefix")->required();
  viz->add_option("--k", va.k, "clusters per frame");
  viz->add_option("--knn", va.knn, "neighbors for the density estimate");
  viz->add_flag("--euclidean", va.euclidean, "raw Euclidean metric instead of dist_st");
  viz->add_option("--attn,--attn-file", va.attn, "attention file (.ta) or 'global-query'");
  viz->add_option("--sinks,--sink-indices", va.sinks, "comma-separated per-frame sink cells");
  viz->add_option("--rope-dims", va.rope_dims, "t,h,w section widths");
  viz->add_option("--theta-t", va.theta_t, "temporal base frequency");
  viz->add_option("--theta-s", va.theta_s, "spatial base frequency");
  viz->add_option("--scale", va.scale, "pixels per grid cell");
  viz->add_flag("--no-tsa", va.no_tsa, "use frame indices instead of timestamps");

  OracleArgs oa;
  CLI::App* oracle = app.add_subcommand("oracle", "cross-check against brute-force references");
  oracle->add_option("--seed", oa.seed, "fixture seed");
  oracle->add_option("--seg-trials", oa.seg_trials, "segmentation trials");
  oracle->add_option("--cluster-trials", oa.cluster_trials, "clustering trials");
  oracle->add_option("--rot-trials", oa.rot_trials, "rotation trials");
  oracle->add_flag("--inject-fault", oa.inject_fault,
                   "corrupt one trial per section to prove the checks can fail");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) tango_set_threads(threads);

  if (prune->parsed()) return cmd_prune(pa, *prune);
  if (seg->parsed()) return cmd_segment(seg_input, seg_tau, seg_cap);
  if (sel->parsed()) return cmd_select(sa);
  if (clus->parsed()) return cmd_cluster(ca);
  if (flops->parsed()) return cmd_flops(fa);
  if (synth->parsed()) return cmd_synth(ya);
  if (viz->parsed()) return cmd_viz(va);
  if (oracle->parsed()) return cmd_oracle(oa);
  return 0;
}
