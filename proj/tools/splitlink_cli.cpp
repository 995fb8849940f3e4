// Command-line surface over the library: fixture synthesis, the offline
// pipeline stages (prepare/corrupt/smash/train), two-party matching in
// process or over TCP, the plain baseline, scoring, and the experiment
// runner. Exit codes: 0 success, 2 config error, 3 protocol abort, 4 data
// error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splitlink/splitlink.hpp"

namespace {

using namespace splitlink;

struct GlobalOpts {
  uint64_t seed = 1;
  std::string config_path;
  std::string kernel = "linear";
  double c = 100.0;
  std::string gamma = "auto";
  size_t rs = 2000;
  std::string mapping = "auto";
  size_t train_size = 2000;
  int errors_per_row = 1;
  std::string out;
};

// Config file first, then explicit flags on top. Flags that were not passed
// leave the config (or the built-in defaults) alone.
ExperimentConfig make_config(const CLI::App& app, const GlobalOpts& g) {
  ExperimentConfig cfg;
  if (app.count("--config")) cfg = ExperimentConfig::load(g.config_path);
  if (app.count("--seed")) cfg.rng_seed = g.seed;
  if (app.count("--kernel")) cfg.kernel = kernel_from_name(g.kernel);
  if (app.count("--c")) cfg.c = g.c;
  if (app.count("--gamma")) cfg.set("gamma", g.gamma);
  if (app.count("--rs")) cfg.reference_size = g.rs;
  if (app.count("--mapping")) cfg.mapping = g.mapping;
  if (app.count("--train-size")) cfg.training_size = g.train_size;
  if (app.count("--errors-per-row")) cfg.errors_per_row = g.errors_per_row;
  return cfg;
}

SvmParams svm_params_from(const ExperimentConfig& cfg, uint64_t seed) {
  SvmParams p;
  p.kernel = cfg.kernel;
  p.c = cfg.c;
  p.gamma = cfg.gamma;
  p.seed = seed;
  return p;
}

Party parse_party(const std::string& s) {
  if (s.size() == 1) return party_from_char(s[0]);
  throw ConfigError("party must be A or B, got '" + s + "'");
}

struct LoadFlags {
  std::string columns;
  std::string id_column;
};

void add_load_flags(CLI::App* sub, LoadFlags& lf) {
  sub->add_option("--columns", lf.columns, "comma-separated value columns to keep");
  sub->add_option("--id-column", lf.id_column, "column holding record ids (default: mint)");
}

LoadOptions to_load_options(const LoadFlags& lf) {
  LoadOptions opts;
  opts.id_column = lf.id_column;
  if (!lf.columns.empty()) {
    size_t start = 0;
    while (start <= lf.columns.size()) {
      size_t comma = lf.columns.find(',', start);
      if (comma == std::string::npos) comma = lf.columns.size();
      opts.columns.push_back(lf.columns.substr(start, comma - start));
      start = comma + 1;
    }
  }
  return opts;
}

// Files this tool writes carry a record_id column; pick it up on reload so
// round trips keep ids without flag ceremony. --id-column still wins.
RecordSet load_records(const std::string& path, Party party, const LoadFlags& lf = {}) {
  LoadOptions opts = to_load_options(lf);
  if (opts.id_column.empty()) {
    auto rows = csv::read_file(path);
    if (!rows.empty())
      for (const auto& name : rows[0])
        if (name == "record_id") opts.id_column = name;
  }
  return load_recordset_csv(path, party, opts);
}

std::string require_out(const GlobalOpts& g, const char* what) {
  if (g.out.empty()) throw ConfigError(std::string(what) + " requires --out");
  return g.out;
}

void write_binary(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for write: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path);
}

void write_reports(const std::vector<MetricsReport>& rows, const std::string& out_path) {
  if (out_path.empty()) {
    save_reports(rows, std::cout);
  } else {
    save_reports(rows, out_path);
    std::cout << "wrote " << rows.size() << " report rows to " << out_path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-party record linkage over reference-set distance vectors"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "base RNG seed");
  app.add_option("--config", g.config_path, "key=value experiment config file");
  app.add_option("--kernel", g.kernel, "svm kernel: linear or rbf")
      ->check(CLI::IsMember({"linear", "rbf"}));
  app.add_option("--c", g.c, "svm regularization C");
  app.add_option("--gamma", g.gamma, "rbf gamma, or 'auto'");
  app.add_option("--rs", g.rs, "reference set size");
  app.add_option("--mapping", g.mapping, "'auto' or rec:ref,rec:ref,...");
  app.add_option("--train-size", g.train_size, "records used for training");
  app.add_option("--errors-per-row", g.errors_per_row, "corruption edits per record");
  app.add_option("--out", g.out, "output file or directory");

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic fixture (records + reference)");
  synth->fallthrough();
  size_t synth_count = 2000;
  synth->add_option("--count", synth_count, "record rows to generate");
  synth->callback([&] {
    ExperimentConfig cfg = make_config(app, g);
    std::filesystem::path dir = g.out.empty() ? "." : g.out;
    std::filesystem::create_directories(dir);
    Fixture fx = generate_fixture({synth_count, cfg.reference_size, cfg.rng_seed});
    save_recordset_csv(fx.records, (dir / "records_a.csv").string());
    save_referenceset_csv(fx.reference, (dir / "reference.csv").string());
    std::cout << "wrote " << fx.records.records.size() << " records and "
              << fx.reference.rows.size() << " reference rows to " << dir.string() << "\n";
  });

  // prepare ---------------------------------------------------------------
  auto* prepare = app.add_subcommand("prepare", "deduplicate a recordset csv");
  prepare->fallthrough();
  std::string prepare_in, prepare_party = "A";
  LoadFlags prepare_load;
  prepare->add_option("--in", prepare_in, "recordset csv")->required();
  prepare->add_option("--party", prepare_party, "owning party (A or B)");
  add_load_flags(prepare, prepare_load);
  prepare->callback([&] {
    RecordSet recs =
        load_records(prepare_in, parse_party(prepare_party), prepare_load);
    size_t before = recs.records.size();
    RecordSet unique = deduplicate(recs);
    save_recordset_csv(unique, require_out(g, "prepare"));
    std::cout << "kept " << unique.records.size() << " of " << before << " records\n";
  });

  // corrupt ---------------------------------------------------------------
  auto* corrupt = app.add_subcommand(
      "corrupt", "derive the second party's records by corrupting each row");
  corrupt->fallthrough();
  std::string corrupt_in, corrupt_truth;
  LoadFlags corrupt_load;
  corrupt->add_option("--in", corrupt_in, "party A recordset csv")->required();
  corrupt->add_option("--truth", corrupt_truth, "also write the ground-truth id pairs here");
  add_load_flags(corrupt, corrupt_load);
  corrupt->callback([&] {
    ExperimentConfig cfg = make_config(app, g);
    RecordSet recs = load_records(corrupt_in, Party::A, corrupt_load);
    CorruptionSpec spec;
    spec.errors_per_row = cfg.errors_per_row;
    auto [recs_b, truth] = make_party_b(recs, spec, cfg.rng_seed);
    save_recordset_csv(recs_b, require_out(g, "corrupt"));
    if (!corrupt_truth.empty()) truth.save_csv(corrupt_truth);
    std::cout << "corrupted " << recs_b.records.size() << " records ("
              << cfg.errors_per_row << " edit(s) per row)\n";
  });

  // smash -----------------------------------------------------------------
  auto* smash = app.add_subcommand(
      "smash", "write a recordset's distance vectors as a batch file");
  smash->fallthrough();
  std::string smash_in, smash_ref, smash_party = "A";
  LoadFlags smash_load;
  smash->add_option("--in", smash_in, "recordset csv")->required();
  smash->add_option("--reference", smash_ref, "reference set csv")->required();
  smash->add_option("--party", smash_party, "owning party (A or B)");
  add_load_flags(smash, smash_load);
  smash->callback([&] {
    ExperimentConfig cfg = make_config(app, g);
    RecordSet recs =
        load_records(smash_in, parse_party(smash_party), smash_load);
    ReferenceSet rs = load_referenceset_csv(smash_ref);
    if (!validate_disjointness(rs, recs))
      throw DataError("recordset shares values with the reference set");
    AttributeMapping mapping = cfg.resolve_mapping_for(recs.schema, rs.schema);
    std::vector<SmashedVector> smashed = smash_recordset(recs, rs, mapping);
    write_binary(require_out(g, "smash"), encode_smashed_batch(smashed));
    std::cout << "smashed " << smashed.size() << " records: "
              << smashed.front().groups.size() << " groups of length "
              << smashed.front().groups.front().size() << "\n";
  });

  // train -----------------------------------------------------------------
  auto* train = app.add_subcommand(
      "train", "train a party's classifier from its own records and save the model");
  train->fallthrough();
  std::string train_in, train_ref, train_party = "A";
  LoadFlags train_load;
  train->add_option("--in", train_in, "recordset csv")->required();
  train->add_option("--reference", train_ref, "reference set csv")->required();
  train->add_option("--party", train_party, "owning party (A or B)");
  add_load_flags(train, train_load);
  train->callback([&] {
    ExperimentConfig cfg = make_config(app, g);
    Party party = parse_party(train_party);
    const char* role_tag = party == Party::A ? "A" : "B";
    RecordSet recs = load_records(train_in, party, train_load);
    ReferenceSet rs = load_referenceset_csv(train_ref);
    if (!validate_disjointness(rs, recs))
      throw DataError("recordset shares values with the reference set");
    AttributeMapping mapping = cfg.resolve_mapping_for(recs.schema, rs.schema);
    RecordSet subset = training_prefix(recs, cfg.training_size);
    if (subset.records.size() < 2) throw DataError("training needs at least two records");
    CorruptionSpec spec;
    spec.errors_per_row = cfg.errors_per_row;
    // Same seed derivation as a live session, so the file equals the model
    // the protocol would train for this party and config.
    RecordSet corrupted = corrupt_recordset(
        subset, spec, derive_seed(cfg.rng_seed, std::string("protocol-corrupt-") + role_tag));
    std::vector<LabeledExample> data = build_training_data(
        smash_recordset(subset, rs, mapping), smash_recordset(corrupted, rs, mapping),
        derive_seed(cfg.rng_seed, std::string("protocol-pairs-") + role_tag));
    SvmParams params = svm_params_from(
        cfg, derive_seed(cfg.rng_seed, std::string("protocol-svm-") + role_tag));
    SvmModel model = train_svm(data, params);
    model.save(require_out(g, "train"));
    std::cout << "trained " << kernel_name(model.kernel) << " model: "
              << model.support_vectors.size() << " support vectors, bias "
              << format_double(model.bias) << ", gamma " << format_double(model.gamma) << "\n";
  });

  // match -----------------------------------------------------------------
  auto* match = app.add_subcommand(
      "match", "run the two-party protocol in process and write both match arrays");
  match->fallthrough();
  std::string match_a, match_b, match_ref;
  match->add_option("--a", match_a, "party A recordset csv")->required();
  match->add_option("--b", match_b, "party B recordset csv")->required();
  match->add_option("--reference", match_ref, "reference set csv")->required();
  match->callback([&] {
    ExperimentConfig cfg = make_config(app, g);
    RecordSet recs_a = load_records(match_a, Party::A);
    RecordSet recs_b = load_records(match_b, Party::B);
    ReferenceSet rs = load_referenceset_csv(match_ref);
    auto [res_a, res_b] = run_in_process(recs_a, recs_b, rs, cfg);
    std::filesystem::path dir = g.out.empty() ? "." : g.out;
    std::filesystem::create_directories(dir);
    res_a.matches.save_csv((dir / "match_a.csv").string());
    res_b.matches.save_csv((dir / "match_b.csv").string());
    std::printf("party A: %zu matched pairs, %.3f s matching\n",
                res_a.matches.predicted_match_count(), res_a.match_seconds);
    std::printf("party B: %zu matched pairs, %.3f s matching\n",
                res_b.matches.predicted_match_count(), res_b.match_seconds);
  });

  // serve / connect ---------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "run one party over TCP, listening");
  serve->fallthrough();
  std::string serve_in, serve_ref, serve_party = "A";
  uint16_t serve_port = 0;
  serve->add_option("--in", serve_in, "recordset csv")->required();
  serve->add_option("--reference", serve_ref, "reference set csv")->required();
  serve->add_option("--port", serve_port, "port to listen on")->required();
  serve->add_option("--party", serve_party, "protocol role (A or B)");

  auto* connect = app.add_subcommand("connect", "run one party over TCP, dialing");
  connect->fallthrough();
  std::string connect_in, connect_ref, connect_party = "B", connect_host = "127.0.0.1";
  uint16_t connect_port = 0;
  connect->add_option("--in", connect_in, "recordset csv")->required();
  connect->add_option("--reference", connect_ref, "reference set csv")->required();
  connect->add_option("--host", connect_host, "host to dial");
  connect->add_option("--port", connect_port, "port to dial")->required();
  connect->add_option("--party", connect_party, "protocol role (A or B)");

  auto run_tcp = [&](Party party, const std::string& in, const std::string& ref,
                     std::unique_ptr<Transport> transport) {
    ExperimentConfig cfg = make_config(app, g);
    RecordSet recs = load_records(in, party);
    ReferenceSet rs = load_referenceset_csv(ref);
    SessionResult res = run_party_session(party, recs, rs, cfg, *transport);
    res.matches.save_csv(require_out(g, "serve/connect"));
    std::printf("party %c: %zu matched pairs, %.3f s matching\n", party_char(party),
                res.matches.predicted_match_count(), res.match_seconds);
  };
  serve->callback([&] {
    run_tcp(parse_party(serve_party), serve_in, serve_ref, tcp_listen_once(serve_port));
  });
  connect->callback([&] {
    run_tcp(parse_party(connect_party), connect_in, connect_ref,
            tcp_dial(connect_host, connect_port));
  });

  // baseline ----------------------------------------------------------------
  auto* baseline = app.add_subcommand(
      "baseline", "non-private linear baseline: train on party A, match raw values");
  baseline->fallthrough();
  std::string baseline_a, baseline_b;
  baseline->add_option("--a", baseline_a, "party A recordset csv")->required();
  baseline->add_option("--b", baseline_b, "party B recordset csv")->required();
  baseline->callback([&] {
    ExperimentConfig cfg = make_config(app, g);
    RecordSet recs_a = load_records(baseline_a, Party::A);
    RecordSet recs_b = load_records(baseline_b, Party::B);
    CorruptionSpec spec;
    spec.errors_per_row = cfg.errors_per_row;
    SvmModel model = train_plain_baseline(
        training_prefix(recs_a, cfg.training_size), spec,
        svm_params_from(cfg, derive_seed(cfg.rng_seed, "plain-svm")),
        derive_seed(cfg.rng_seed, "plain"));
    auto start = std::chrono::steady_clock::now();
    MatchArray ma = plain_match(recs_a, recs_b, model);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ma.save_csv(require_out(g, "baseline"));
    std::printf("baseline: %zu matched pairs, %.3f s matching\n",
                ma.predicted_match_count(), seconds);
  });

  // score ---------------------------------------------------------------------
  auto* score_cmd = app.add_subcommand("score", "precision/recall of a match array vs truth");
  score_cmd->fallthrough();
  std::string score_matches, score_truth, score_party = "A";
  score_cmd->add_option("--matches", score_matches, "match array csv")->required();
  score_cmd->add_option("--truth", score_truth, "ground-truth pair csv")->required();
  score_cmd->add_option("--party", score_party, "label for the report row");
  score_cmd->callback([&] {
    MatchArray ma = MatchArray::load_csv(score_matches);
    TruthSet truth = TruthSet::load_csv(score_truth);
    MetricsReport row = score(ma, truth);
    row.party = score_party;
    write_reports({row}, g.out);
  });

  // experiment ------------------------------------------------------------------
  auto* experiment = app.add_subcommand(
      "experiment", "full pipeline: plain + both split parties, repeated and averaged");
  experiment->fallthrough();
  size_t experiment_match = 0;
  int experiment_reps = 0;
  experiment->add_option("--match-size", experiment_match, "records per party to match");
  experiment->add_option("--repetitions", experiment_reps, "repetitions to average");
  experiment->callback([&] {
    ExperimentConfig cfg = make_config(app, g);
    if (experiment_match) cfg.match_size = experiment_match;
    if (experiment_reps) cfg.repetitions = experiment_reps;
    write_reports(run_experiment(cfg), g.out);
  });

  // emit-figures -------------------------------------------------------------
  auto* figures = app.add_subcommand(
      "emit-figures", "long-format csv series (x, series, y) from report rows");
  figures->fallthrough();
  std::string figures_reports;
  figures->add_option("--reports", figures_reports, "report csv from 'experiment'")->required();
  figures->callback([&] {
    std::string dir = g.out.empty() ? "figures" : g.out;
    emit_figure_data(load_reports(figures_reports), dir);
    std::cout << "wrote precision.csv, recall.csv, match_seconds.csv to " << dir << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol abort: " << e.what() << "\n";
    return 3;
  } catch (const ByteUnderflow& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
