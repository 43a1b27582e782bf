// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "lhnn/baseline.hpp"
#include "lhnn/error.hpp"
#include "lhnn/format.hpp"
#include "lhnn/io.hpp"
#include "lhnn/model.hpp"
#include "lhnn/synth.hpp"

namespace lhnn::cli {

namespace {

namespace fs = std::filesystem;

struct Item {
  std::string name;
  Circuit circuit;
  LHGraph graph;
  LabeledMaps labels;
};

std::string fixed4(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 4);
  return std::string(buf.data(), ptr);
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

Circuit load_circuit(const std::string& path, RunManifest& manifest) {
  manifest.add_input(path);
  return parse_circuit(read_file(path));
}

LabeledMaps load_labels(const std::string& path, RunManifest& manifest) {
  manifest.add_input(path);
  const MapTable t = table_from_csv(read_file(path));
  LabeledMaps y;
  y.nx = t.nx;
  y.ny = t.ny;
  y.demand_h = t.column("demand_h");
  y.demand_v = t.column("demand_v");
  y.cong_h = t.column("cong_h");
  y.cong_v = t.column("cong_v");
  return y;
}

// Labels come from files when given, otherwise from the oracle at the circuit's own capacities.
std::vector<Item> load_items(const std::vector<std::string>& circuits, const std::vector<std::string>& labels,
                             double filter_fraction, RunManifest& manifest) {
  if (!labels.empty() && labels.size() != circuits.size()) {
    throw ConfigError("got " + std::to_string(labels.size()) + " label files for " + std::to_string(circuits.size()) +
                      " circuits");
  }
  std::vector<Item> items;
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    Item it;
    it.name = stem_of(circuits[i]);
    it.circuit = load_circuit(circuits[i], manifest);
    it.graph = build_lhgraph(it.circuit, {filter_fraction});
    it.labels = labels.empty() ? oracle_labels(it.circuit) : load_labels(labels[i], manifest);
    if (it.labels.nx != it.circuit.grid.nx || it.labels.ny != it.circuit.grid.ny) {
      throw ShapeError("labels of '" + circuits[i] + "' do not match its grid");
    }
    items.push_back(std::move(it));
  }
  return items;
}

std::vector<TrainingSample> samples_of(const std::vector<Item>& items, std::size_t channels) {
  std::vector<TrainingSample> out;
  for (const Item& it : items) {
    out.push_back({it.name, &it.graph, it.labels.demand_matrix(channels), it.labels.congestion_matrix(channels)});
  }
  return out;
}

void write_output(const std::string& path, std::string_view contents, RunManifest& manifest) {
  write_file(path, contents);
  manifest.outputs.push_back(path);
}

void write_pgms(const std::string& dir, const MapTable& table, RunManifest& manifest) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  for (const auto& [name, plane] : table.columns) {
    PgmScale scale;
    const std::string pgm = plane_to_pgm(plane, table.nx, table.ny, &scale);
    write_output((fs::path(dir) / (name + ".pgm")).string(), pgm, manifest);
    manifest.pgm_scales.emplace_back(name, scale);
  }
}

// Config keys double as flags; flags win over the config file.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", file, "config file, one key = value per line");
    std::istringstream text(config_to_text(LHNNConfig{}));
    std::string line;
    while (std::getline(text, line)) {
      const std::string key = line.substr(0, line.find(' '));
      if (key == "version") continue;
      sub->add_option("--" + key, values[key], "config key " + key);
    }
  }

  LHNNConfig resolve(RunManifest& manifest) const {
    LHNNConfig config;
    if (!file.empty()) {
      manifest.add_input(file);
      config = config_from_text(read_file(file));
    }
    for (const auto& [key, value] : values) {
      if (app->count("--" + key) > 0) config.set(key, value);
    }
    config.validate();
    manifest.config = config_to_text(config);
    manifest.seed = config.seed;
    return config;
  }
};

std::string metrics_line(const Metrics& m) {
  return "F1=" + fixed4(m.f1) + " ACC=" + fixed4(m.acc);
}

// ---- commands ----

struct GenArgs {
  SynthSpec spec;
  std::string out;
  std::string labels;
  std::string pgm_dir;
  double target_rate = -1.0;
};

int cmd_gen(const GenArgs& a, RunManifest& manifest, std::ostream& out) {
  manifest.seed = a.spec.seed;
  Circuit c = gen_synthetic(a.spec);
  if (a.target_rate >= 0.0) {
    const LabeledMaps y = oracle_labels(c);
    const double cap = tune_capacity({&y.demand_h}, a.target_rate);
    c.grid.cap_h = cap;
    c.grid.cap_v = cap;
  }
  write_output(a.out, serialize_circuit(c), manifest);
  const LabeledMaps y = oracle_labels(c);
  if (!a.labels.empty()) write_output(a.labels, table_to_csv(table_from(y)), manifest);
  write_pgms(a.pgm_dir, table_from(y), manifest);
  out << "cells " << c.cells.size() << "\nnets " << c.nets.size() << "\ncap_h " << format_real(c.grid.cap_h)
      << "\ncap_v " << format_real(c.grid.cap_v) << "\ncongestion_rate_h " << format_significant(y.congestion_rate_h(), 6)
      << "\ncongestion_rate_v " << format_significant(y.congestion_rate_v(), 6) << "\n";
  return kOk;
}

struct BuildArgs {
  std::string circuit;
  double filter = kDefaultGNetFilterFraction;
  std::string dump_dir;
};

int cmd_build(const BuildArgs& a, RunManifest& manifest, std::ostream& out) {
  const Circuit c = load_circuit(a.circuit, manifest);
  const LHGraph g = build_lhgraph(c, {a.filter});
  auto total = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  };
  out << "gcells " << g.n_gcells() << "\ngnets " << g.n_gnets() << "\nremoved_gnets " << g.removed_gnets
      << "\nnnz_H " << g.incidence.nnz() << "\nnnz_A " << g.adjacency.nnz() << "\nsum_D "
      << format_real(total(g.degrees.cell_net)) << "\nsum_B " << format_real(total(g.degrees.net_cell))
      << "\nsum_P " << format_real(total(g.degrees.lattice)) << "\n";
  if (!a.dump_dir.empty()) {
    fs::create_directories(a.dump_dir);
    write_output((fs::path(a.dump_dir) / "H.txt").string(), g.incidence.to_triplet_text(), manifest);
    write_output((fs::path(a.dump_dir) / "A.txt").string(), g.adjacency.to_triplet_text(), manifest);
  }
  return kOk;
}

struct FeaturizeArgs {
  std::string circuit;
  std::string out;
  std::string pgm_dir;
  double filter = kDefaultGNetFilterFraction;
};

int cmd_featurize(const FeaturizeArgs& a, RunManifest& manifest, std::ostream& out) {
  const Circuit c = load_circuit(a.circuit, manifest);
  const LHGraph g = build_lhgraph(c, {a.filter});
  const MapTable t = table_from(crafted_feature_map(c, g.gnets));
  write_output(a.out, table_to_csv(t), manifest);
  write_pgms(a.pgm_dir, t, manifest);
  out << "gcells " << g.n_gcells() << "\nchannels " << t.columns.size() << "\n";
  return kOk;
}

struct TrainArgs {
  std::string model = "lhnn";
  std::vector<std::string> circuits;
  std::vector<std::string> labels;
  std::string out;
  std::string log;
  ConfigFlags config;
};

int cmd_train(const TrainArgs& a, RunManifest& manifest, std::ostream& out) {
  const LHNNConfig config = a.config.resolve(manifest);
  const std::vector<Item> items = load_items(a.circuits, a.labels, config.gnet_filter_fraction, manifest);
  const std::vector<TrainingSample> samples = samples_of(items, config.outputs());

  std::ofstream log;
  if (!a.log.empty()) {
    const bool fresh = !fs::exists(a.log);
    log.open(a.log, std::ios::binary | std::ios::app);
    if (!log) throw IoError("cannot open '" + a.log + "'");
    if (fresh) log << epoch_csv_header();
    manifest.outputs.push_back(a.log);
  }
  EpochMetrics last;
  auto on_epoch = [&](const EpochMetrics& m) {
    last = m;
    if (log.is_open()) log << epoch_csv_row(m);
  };
  Checkpoint ckpt = a.model == "mlp" ? train_mlp(samples, config, nullptr, on_epoch).to_checkpoint()
                                     : train_lhnn(samples, config, nullptr, on_epoch).to_checkpoint();
  write_output(a.out, encode_checkpoint(ckpt), manifest);
  out << "model " << a.model << "\ncircuits " << items.size() << "\nepochs " << config.epochs << "\n";
  if (config.epochs > 0) {
    out << "final_loss " << format_significant(last.loss, 9) << "\nfinal_train_f1 " << format_significant(last.f1, 6)
        << "\n";
  }
  return kOk;
}

struct PredictArgs {
  std::string checkpoint;
  std::string circuit;
  std::string out;
  std::string pgm_dir;
};

int cmd_predict(const PredictArgs& a, RunManifest& manifest, std::ostream& out) {
  manifest.add_input(a.checkpoint);
  const Checkpoint ckpt = decode_checkpoint(read_file(a.checkpoint));
  const std::string kind = checkpoint_model_kind(ckpt);
  const Circuit c = load_circuit(a.circuit, manifest);

  Prediction p;
  LHNNConfig config;
  if (kind == "mlp") {
    const MLPModel m = MLPModel::from_checkpoint(ckpt);
    config = m.config();
    p = m.predict(build_lhgraph(c, {config.gnet_filter_fraction}));
  } else {
    const LHNNModel m = LHNNModel::from_checkpoint(ckpt);
    config = m.config();
    p = m.predict(build_lhgraph(c, {config.gnet_filter_fraction}));
  }
  manifest.config = config_to_text(config);
  manifest.seed = config.seed;

  MapTable t{c.grid.nx, c.grid.ny, {}};
  static const char* kSuffix[] = {"_h", "_v"};
  auto add_cols = [&t](const std::string& prefix, const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      Plane plane(static_cast<std::size_t>(m.rows()));
      for (Eigen::Index i = 0; i < m.rows(); ++i) plane[static_cast<std::size_t>(i)] = m(i, j);
      t.add(prefix + kSuffix[j], std::move(plane));
    }
  };
  add_cols("cls", p.cls);
  if (p.reg.size() > 0) add_cols("reg", p.reg);
  write_output(a.out, table_to_csv(t), manifest);
  write_pgms(a.pgm_dir, t, manifest);
  out << "model " << kind << "\ngcells " << c.grid.gcell_count() << "\n";
  return kOk;
}

struct EvalArgs {
  std::vector<std::string> preds;
  std::vector<std::string> labels;
  double threshold = 0.5;
  std::string out;
};

int cmd_eval(const EvalArgs& a, RunManifest& manifest, std::ostream& out) {
  if (a.preds.size() != a.labels.size()) throw ConfigError("need one label file per prediction file");
  std::vector<std::pair<Matrix, Matrix>> pairs;
  for (std::size_t i = 0; i < a.preds.size(); ++i) {
    manifest.add_input(a.preds[i]);
    const MapTable p = table_from_csv(read_file(a.preds[i]));
    const LabeledMaps y = load_labels(a.labels[i], manifest);
    if (p.nx != y.nx || p.ny != y.ny) throw ShapeError("'" + a.preds[i] + "' and its labels differ in grid size");
    const std::size_t k = p.has("cls_v") ? 2 : 1;
    pairs.emplace_back(p.matrix(k == 2 ? std::vector<std::string>{"cls_h", "cls_v"} : std::vector<std::string>{"cls_h"}),
                       y.congestion_matrix(k));
  }
  const EvalReport r = evaluate(pairs, a.threshold);
  std::string report = "circuits " + std::to_string(pairs.size()) + "\n";
  report += "micro " + metrics_line(r.micro) + " TP=" + std::to_string(r.micro.counts.tp) +
            " FP=" + std::to_string(r.micro.counts.fp) + " FN=" + std::to_string(r.micro.counts.fn) +
            " TN=" + std::to_string(r.micro.counts.tn) + "\n";
  report += "macro F1=" + fixed4(r.macro_f1) + " ACC=" + fixed4(r.macro_acc) + "\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    report += "circuit " + stem_of(a.preds[i]) + " " + metrics_line(r.per_circuit[i]) + "\n";
  }
  if (!a.out.empty()) write_output(a.out, report, manifest);
  out << report;
  return kOk;
}

struct AblateArgs {
  std::vector<std::string> circuits;
  std::vector<std::string> labels;
  std::vector<std::string> test_circuits;
  std::vector<std::string> test_labels;
  std::size_t threads = 1;
  std::string out;
  ConfigFlags config;
};

struct AblationRow {
  bool featuregen = true;
  bool hypermp = true;
  bool latticemp = true;
  bool joint = true;
  bool gcell = true;
  Metrics metrics;
  std::string error;
};

int cmd_ablate(const AblateArgs& a, RunManifest& manifest, std::ostream& out) {
  const LHNNConfig base = a.config.resolve(manifest);
  const std::vector<Item> train = load_items(a.circuits, a.labels, base.gnet_filter_fraction, manifest);
  const std::vector<Item> test = load_items(a.test_circuits, a.test_labels, base.gnet_filter_fraction, manifest);
  const std::vector<TrainingSample> samples = samples_of(train, base.outputs());

  std::vector<AblationRow> rows(6);
  rows[1].featuregen = false;
  rows[2].hypermp = false;
  rows[3].latticemp = false;
  rows[4].joint = false;
  rows[5].gcell = false;

  auto run_row = [&](AblationRow& row) {
    try {
      LHNNConfig c = base;
      c.use_featuregen_edges = base.use_featuregen_edges && row.featuregen;
      c.use_hypermp_edges = base.use_hypermp_edges && row.hypermp;
      c.use_latticemp_edges = base.use_latticemp_edges && row.latticemp;
      c.use_regression_head = base.use_regression_head && row.joint;
      c.use_gcell_features = base.use_gcell_features && row.gcell;
      const LHNNModel m = train_lhnn(samples, c);
      std::vector<std::pair<Matrix, Matrix>> pairs;
      for (const Item& it : test) pairs.emplace_back(m.predict(it.graph).cls, it.labels.congestion_matrix(c.outputs()));
      row.metrics = evaluate(pairs).micro;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(a.threads, rows.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < rows.size(); r += workers) run_row(rows[r]);
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& row : rows) {
    if (!row.error.empty()) throw DivergenceError("ablation row failed: " + row.error);
  }

  auto mark = [](bool on) { return on ? "  on  " : "  --  "; };
  std::string table = "featuregen hypermp latticemp jointing gcell_feature | F1     ACC    dF1/F1_full(%)\n";
  const double full = rows[0].metrics.f1;
  for (const auto& row : rows) {
    const double rel = full > 0 ? 100.0 * (row.metrics.f1 - full) / full : 0.0;
    table += std::string(mark(row.featuregen)) + "    " + mark(row.hypermp) + "  " + mark(row.latticemp) + "   " +
             mark(row.joint) + "  " + mark(row.gcell) + "       | " + fixed4(row.metrics.f1) + " " +
             fixed4(row.metrics.acc) + " " + format_significant(rel, 4) + "\n";
  }
  if (!a.out.empty()) write_output(a.out, table, manifest);
  out << table;
  return kOk;
}

struct SplitArgs {
  std::vector<std::string> circuits;
  std::vector<std::string> labels;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::string out;
};

int cmd_split(const SplitArgs& a, RunManifest& manifest, std::ostream& out) {
  const std::vector<Item> items = load_items(a.circuits, a.labels, kDefaultGNetFilterFraction, manifest);
  std::vector<std::pair<std::string, double>> rates;
  for (const Item& it : items) rates.emplace_back(it.name, it.labels.congestion_rate_h());
  const std::string text = search_split(rates, a.n_train, a.n_test).to_string();
  if (!a.out.empty()) write_output(a.out, text, manifest);
  out << text;
  return kOk;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return kDiverged;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const GeometryError*>(&e)) {
    return kParse;
  }
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return kUsage;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
  return kInternal;
}

const char* category(int code) {
  switch (code) {
    case kUsage: return "config error";
    case kIo: return "io error";
    case kParse: return "input error";
    case kDiverged: return "training diverged";
    default: return "internal error";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lattice hypergraph congestion prediction toolkit", "lhnn"};
  app.require_subcommand(1);
  std::string manifest_path = "lhnn_runs.manifest";
  app.add_option("--manifest", manifest_path, "run manifest, appended to");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a synthetic circuit and its oracle labels");
  g->add_option("--out", gen.out, "circuit file")->required();
  g->add_option("--labels", gen.labels, "labels CSV");
  g->add_option("--pgm-dir", gen.pgm_dir, "directory for label PGMs");
  g->add_option("--nx", gen.spec.nx);
  g->add_option("--ny", gen.spec.ny);
  g->add_option("--gcell_size", gen.spec.gcell_size);
  g->add_option("--n_nets", gen.spec.n_nets);
  g->add_option("--movable_per_gcell", gen.spec.movable_per_gcell);
  g->add_option("--terminal_fraction", gen.spec.terminal_fraction);
  g->add_option("--anchored_fraction", gen.spec.anchored_fraction);
  g->add_option("--wire_fraction", gen.spec.wire_fraction);
  g->add_option("--local_min_pins", gen.spec.local_min_pins);
  g->add_option("--local_max_pins", gen.spec.local_max_pins);
  g->add_option("--rail_reach", gen.spec.rail_reach);
  g->add_option("--wire_spread", gen.spec.wire_spread);
  g->add_option("--local_radius", gen.spec.local_radius);
  g->add_option("--cap_h", gen.spec.cap_h);
  g->add_option("--cap_v", gen.spec.cap_v);
  g->add_option("--seed", gen.spec.seed);
  g->add_option("--target_rate", gen.target_rate, "tune both capacities to this congestion rate");

  BuildArgs build;
  auto* b = app.add_subcommand("build", "build the lattice hypergraph and print a summary");
  b->add_option("--circuit", build.circuit)->required();
  b->add_option("--gnet_filter_fraction", build.filter);
  b->add_option("--dump-dir", build.dump_dir, "write H and A as triplet text");

  FeaturizeArgs feat;
  auto* f = app.add_subcommand("featurize", "export the crafted G-cell feature maps");
  f->add_option("--circuit", feat.circuit)->required();
  f->add_option("--out", feat.out, "features CSV")->required();
  f->add_option("--pgm-dir", feat.pgm_dir);
  f->add_option("--gnet_filter_fraction", feat.filter);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train LHNN or the MLP baseline");
  t->add_option("--model", train.model)->check(CLI::IsMember({"lhnn", "mlp"}));
  t->add_option("--circuits", train.circuits)->required();
  t->add_option("--labels", train.labels, "label CSVs, one per circuit; oracle labels when omitted");
  t->add_option("--out", train.out, "checkpoint")->required();
  t->add_option("--log", train.log, "per-epoch metrics CSV, appended to");
  train.config.attach(t);

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "predict congestion and demand maps");
  p->add_option("--checkpoint", pred.checkpoint)->required();
  p->add_option("--circuit", pred.circuit)->required();
  p->add_option("--out", pred.out, "prediction CSV")->required();
  p->add_option("--pgm-dir", pred.pgm_dir);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "F1 and accuracy of predictions against labels");
  e->add_option("--pred", ev.preds)->required();
  e->add_option("--labels", ev.labels)->required();
  e->add_option("--threshold", ev.threshold);
  e->add_option("--out", ev.out);

  AblateArgs abl;
  auto* a = app.add_subcommand("ablate", "train every single-module ablation and report test F1");
  a->add_option("--circuits", abl.circuits)->required();
  a->add_option("--labels", abl.labels);
  a->add_option("--test-circuits", abl.test_circuits)->required();
  a->add_option("--test-labels", abl.test_labels);
  a->add_option("--threads", abl.threads);
  a->add_option("--out", abl.out);
  abl.config.attach(a);

  SplitArgs split;
  auto* s = app.add_subcommand("split", "search the train/test split with the closest congestion rates");
  s->add_option("--circuits", split.circuits)->required();
  s->add_option("--labels", split.labels);
  s->add_option("--n-train", split.n_train)->required();
  s->add_option("--n-test", split.n_test)->required();
  s->add_option("--out", split.out);

  RunManifest manifest;
  for (const auto& arg : args) manifest.command += (manifest.command.empty() ? "" : " ") + arg;
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](int code) {
    manifest.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.exit_code = code;
    try {
      append_manifest(manifest_path, manifest);
    } catch (const IoError& ex) {
      err << "lhnn: io error: " << ex.what() << "\n";
      if (code == kOk) code = kIo;
    }
    return code;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    manifest.diagnostic = std::string("usage error: ") + ex.what();
    err << "lhnn: " << manifest.diagnostic << "\n";
    return finish(kUsage);
  }

  CLI::App* sub = app.get_subcommands().front();
  int code = kOk;
  try {
    if (sub == g) code = cmd_gen(gen, manifest, out);
    else if (sub == b) code = cmd_build(build, manifest, out);
    else if (sub == f) code = cmd_featurize(feat, manifest, out);
    else if (sub == t) code = cmd_train(train, manifest, out);
    else if (sub == p) code = cmd_predict(pred, manifest, out);
    else if (sub == e) code = cmd_eval(ev, manifest, out);
    else if (sub == a) code = cmd_ablate(abl, manifest, out);
    else if (sub == s) code = cmd_split(split, manifest, out);
  } catch (const std::exception& ex) {
    code = classify(ex);
    manifest.diagnostic = std::string(category(code)) + ": " + ex.what();
    err << "lhnn: " << manifest.diagnostic << "\n";
  }
  return finish(code);
}

}  // namespace lhnn::cli
