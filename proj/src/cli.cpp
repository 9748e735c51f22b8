#include "porttfidf/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "porttfidf/cleanse.hpp"
#include "porttfidf/corpus.hpp"
#include "porttfidf/forensics.hpp"
#include "porttfidf/record.hpp"
#include "porttfidf/scoring.hpp"
#include "porttfidf/synth.hpp"

namespace porttfidf::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Options {
  std::string proto;
  std::size_t window = 30;
  std::size_t top_k = 5;
  std::string idf = "smoothed";
  std::string tf = "linear";
  std::vector<int> stop_ports{445, 23, 22, 80, 81, 8080, 443};
  std::string threshold = "auto";
  Count sweep_start = 1000;
  std::size_t bins = 40;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string format = "auto";
  std::vector<std::string> inputs;
  std::string corpus;
  std::string spec;
  std::optional<int> port;
  std::string from;
  std::string to;
  double min_share = 0.8;
  std::size_t min_days = 3;
};

int exit_code_for(Errc e) {
  switch (e) {
    case Errc::MalformedRecord:
    case Errc::FieldOutOfRange:
    case Errc::UnsupportedProtocol:
    case Errc::EmptyInput:
    case Errc::InvalidSpec:
    case Errc::InvalidArgument:
    case Errc::Io:
      return kInputError;
    case Errc::EmptyCorpus:
    case Errc::NoSurvivingPorts:
    case Errc::EmptyDocument:
    case Errc::InsufficientHistory:
    case Errc::RangeOutOfCorpus:
    case Errc::NoSamples:
    case Errc::EmptyRange:
    case Errc::BlockOutOfRange:
      return kDomainError;
  }
  return kInternal;
}

// Write via a temporary file and rename so readers never see partial output.
void write_atomic(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::Io, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PortSet stop_ports_of(const Options& o) {
  PortSet s;
  for (int p : o.stop_ports) {
    if (p < 0 || p > 65535) throw Error(Errc::InvalidArgument, "stop port " + std::to_string(p) + " outside 0-65535");
    s.insert(static_cast<Port>(p));
  }
  return s;
}

Protocol proto_of(const Options& o, Protocol fallback) {
  return o.proto.empty() ? fallback : parse_protocol(o.proto);
}

std::vector<AccessRecord> load_inputs(const Options& o) {
  if (o.inputs.empty()) throw Error(Errc::InvalidArgument, "no input files given (--input)");
  std::vector<AccessRecord> all;
  for (const auto& path : o.inputs) {
    const RecordFormat fmt = o.format == "auto" ? record_format_for_path(path) : parse_record_format(o.format);
    auto recs = read_records(std::span<const std::string>(&path, 1), fmt);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

std::optional<Count> threshold_of(const Options& o) {
  if (o.threshold == "auto") return std::nullopt;
  Count t = 0;
  auto [p, ec] = std::from_chars(o.threshold.data(), o.threshold.data() + o.threshold.size(), t);
  if (ec != std::errc{} || p != o.threshold.data() + o.threshold.size() || t < 1)
    throw Error(Errc::InvalidArgument, "threshold must be 'auto' or a positive integer");
  return t;
}

ScoringConfig scoring_of(const Options& o) {
  ScoringConfig c;
  c.window_days = o.window;
  c.top_k = o.top_k;
  c.idf_mode = parse_idf_mode(o.idf);
  c.tf_mode = parse_tf_mode(o.tf);
  c.validate();
  return c;
}

std::string require_corpus(const Options& o) {
  if (o.corpus.empty()) throw Error(Errc::InvalidArgument, "no corpus file given (--corpus)");
  return o.corpus;
}

ojson trace_json(const std::vector<IdfHistogram>& trace) {
  auto arr = ojson::array();
  for (const auto& h : trace)
    arr.push_back({{"threshold", h.threshold}, {"top_bin_count", h.top_bin_count}, {"distinct_ports", h.distinct_ports}});
  return arr;
}

void write_trace(const fs::path& out, const std::vector<IdfHistogram>& trace) {
  write_atomic(out / "sweep_trace.csv", sweep_trace_csv(trace));
  for (const auto& h : trace)
    if (h.distinct_ports > 0)
      write_atomic(out / "histograms" / ("idf_hist_" + std::to_string(h.threshold) + ".csv"), histogram_csv(h));
}

// ---- commands ---------------------------------------------------------------

int cmd_ingest(const Options& o) {
  const Protocol proto = proto_of(o, Protocol::Tcp);
  const auto records = load_inputs(o);
  if (records.empty()) throw Error(Errc::EmptyInput, "input contains no records");
  const Corpus corpus = aggregate_daily(records, proto);
  const fs::path out(o.out);
  write_atomic(out / ("corpus_" + std::string(to_string(proto)) + ".json"), corpus_to_json(corpus));

  ojson summary;
  summary["protocol"] = to_string(proto);
  summary["first_day"] = corpus.first_day().to_string();
  summary["last_day"] = corpus.last_day().to_string();
  summary["days"] = corpus.N();
  summary["packets"] = corpus.total();
  summary["records_read"] = records.size();
  ojson monthly = ojson::object();
  for (const auto& d : corpus.docs()) {
    const auto key = d.day().to_string().substr(0, 7);
    monthly[key] = monthly.value(key, Count{0}) + d.total();
  }
  summary["monthly_packets"] = std::move(monthly);
  write_atomic(out / ("ingest_summary_" + std::string(to_string(proto)) + ".json"), summary.dump(1) + "\n");
  std::cout << "ingested " << corpus.total() << " " << to_string(proto) << " packets over " << corpus.N() << " days\n";
  return kOk;
}

int cmd_sweep(const Options& o) {
  const Corpus corpus = apply_stop_ports(load_corpus(require_corpus(o)), stop_ports_of(o));
  SweepResult sweep;
  try {
    sweep = auto_select_threshold(corpus, o.sweep_start, o.bins);
  } catch (const Error& e) {
    if (e.code() == Errc::NoSurvivingPorts)
      std::cerr << "hint: no port reaches " << o.sweep_start
                << " accesses on any day; lower --sweep-start to match the traffic volume\n";
    throw;
  }
  const fs::path out(o.out);
  write_trace(out, sweep.trace);
  ojson j;
  j["threshold"] = sweep.threshold;
  j["sweep_start"] = o.sweep_start;
  j["trace"] = trace_json(sweep.trace);
  write_atomic(out / "sweep.json", j.dump(1) + "\n");
  std::cout << sweep.threshold << "\n";
  return kOk;
}

int cmd_scan(const Options& o) {
  const Corpus raw = load_corpus(require_corpus(o));
  const ScoringConfig scoring = scoring_of(o);
  CleanseConfig cc;
  cc.stop_ports = stop_ports_of(o);
  cc.threshold = threshold_of(o);
  cc.sweep_start = o.sweep_start;
  cc.histogram_bins = o.bins;
  const CleanseResult cleansed = cleanse(raw, cc);
  const auto rankings = sliding_scan(cleansed.corpus, scoring);

  const fs::path out(o.out);
  write_atomic(out / "rankings.json", rankings_to_json(rankings, scoring));
  write_atomic(out / "rankings.csv", rankings_to_csv(rankings));
  std::set<Port> flagged;
  for (const auto& r : rankings)
    for (const auto& e : r.entries) flagged.insert(e.port);
  for (Port p : flagged)
    write_atomic(out / "history" / ("port_" + std::to_string(p) + ".csv"),
                 history_to_csv(port_history(raw, p, raw.range())));
  if (!cleansed.trace.empty()) write_trace(out, cleansed.trace);

  ojson summary;
  summary["protocol"] = to_string(raw.protocol());
  summary["threshold"] = cleansed.threshold;
  summary["threshold_mode"] = cc.threshold ? "fixed" : "auto";
  summary["window"] = scoring.window_days;
  summary["top_k"] = scoring.top_k;
  summary["rankings"] = rankings.size();
  summary["flagged_ports"] = flagged;
  write_atomic(out / "scan_summary.json", summary.dump(1) + "\n");
  std::cout << "scored " << rankings.size() << " days at threshold " << cleansed.threshold << "; "
            << flagged.size() << " ports reached the top " << scoring.top_k << "\n";
  return kOk;
}

int cmd_wave(const Options& o) {
  const Protocol proto = proto_of(o, Protocol::Udp);
  const auto records = load_inputs(o);
  const HourlySeries hourly = aggregate_hourly(records, proto);
  DateRange range{hourly.buckets.begin()->first.first, hourly.buckets.rbegin()->first.first};
  if (!o.from.empty()) range.first = Day::parse(o.from);
  if (!o.to.empty()) range.last = Day::parse(o.to);

  WaveOptions wo;
  wo.min_share = o.min_share;
  wo.min_days = o.min_days;
  wo.stop_ports = stop_ports_of(o);
  const WaveReport wave = detect_wave(hourly, range, wo);

  Port port = 0;
  if (o.port) {
    if (*o.port < 0 || *o.port > 65535) throw Error(Errc::InvalidArgument, "port outside 0-65535");
    port = static_cast<Port>(*o.port);
  } else if (wave.run_length > 0 && wave.segments[wave.run_start].dominant_port) {
    port = *wave.segments[wave.run_start].dominant_port;
  } else {
    const WaveSegment* best = nullptr;
    for (const auto& s : wave.segments)
      if (s.dominant_port && (!best || s.share > best->share)) best = &s;
    if (!best) throw Error(Errc::NoSamples, "no traffic in range");
    port = *best->dominant_port;
  }

  std::vector<AccessRecord> selected;
  for (const auto& r : records)
    if (r.protocol == proto && r.dst_port == port && range.contains(r.day())) selected.push_back(r);
  const auto payload = payload_distribution(selected, port);
  const auto srcport = srcport_distribution(selected, port);
  const auto heatmap = source_heatmap(selected, port, range);

  const fs::path out(o.out);
  const auto tag = std::to_string(port);
  write_atomic(out / "wave.json", wave_report_json(wave));
  write_atomic(out / ("payload_" + tag + ".csv"), distribution_csv(payload));
  write_atomic(out / ("srcport_" + tag + ".csv"), distribution_csv(srcport.distribution));
  write_atomic(out / ("heatmap_" + tag + ".csv"), heatmap_csv(heatmap));
  write_atomic(out / ("heatmap_" + tag + ".svg"), heatmap_svg(heatmap));
  ojson f;
  f["port"] = port;
  f["from"] = range.first.to_string();
  f["to"] = range.last.to_string();
  f["records"] = payload.total;
  f["payload"] = {{"min", payload.min}, {"max", payload.max}, {"total", payload.total}};
  f["srcport"] = {{"min", srcport.distribution.min},
                  {"max", srcport.distribution.max},
                  {"high_fraction", srcport.high_fraction}};
  Count blocks = 0, sources = 0;
  for (const auto& row : heatmap.grid)
    for (auto c : row) {
      blocks += c > 0;
      sources += c;
    }
  f["heatmap"] = {{"distinct_sources", sources}, {"nonzero_blocks", blocks}};
  write_atomic(out / "forensics.json", f.dump(1) + "\n");
  std::cout << "rotation " << (wave.rotation_detected ? "detected" : "not detected") << "; port " << port
            << ": payload " << payload.min << "-" << payload.max << " bytes, " << srcport.high_fraction
            << " of sources at or above " << kEphemeralFloor << "\n";
  return kOk;
}

int cmd_isn(const Options& o) {
  if (!o.port) throw Error(Errc::InvalidArgument, "--port is required");
  if (*o.port < 0 || *o.port > 65535) throw Error(Errc::InvalidArgument, "port outside 0-65535");
  const auto records = load_inputs(o);
  const auto rep = isn_fingerprint(records, static_cast<Port>(*o.port));
  write_atomic(fs::path(o.out) / ("isn_" + std::to_string(rep.port) + ".json"), isn_report_json(rep));
  std::cout << rep.matched << " of " << rep.total_syn << " SYNs to port " << rep.port
            << " carry the destination address as ISN (" << rep.fraction << ")\n";
  return kOk;
}

int cmd_synth(const Options& o) {
  synth::ScenarioSpec spec = o.spec.empty() ? synth::paper_scenario() : synth::scenario_from_json(read_file(o.spec));
  if (o.seed) spec.seed = *o.seed;
  const auto scenario = synth::generate(spec);
  const fs::path out(o.out);
  write_atomic(out / "records.ndjson", synth::records_to_ndjson(scenario.records));
  write_atomic(out / "labels.json", synth::labels_to_json(scenario.labels));
  write_atomic(out / "scenario.json", synth::scenario_to_json(spec));
  Count tcp = 0, udp = 0;
  for (const auto& r : scenario.records) (r.protocol == Protocol::Tcp ? tcp : udp) += 1;
  ojson summary;
  summary["seed"] = spec.seed;
  summary["days"] = spec.date_range.length();
  summary["records"] = scenario.records.size();
  summary["tcp"] = tcp;
  summary["udp"] = udp;
  summary["labels"] = scenario.labels.size();
  write_atomic(out / "synth_summary.json", summary.dump(1) + "\n");
  std::cout << "generated " << scenario.records.size() << " records over " << spec.date_range.length() << " days, "
            << scenario.labels.size() << " labelled anomalies\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"TF-IDF port access analysis for darknet traffic", "port-tfidf"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI run configuration; command-line flags override it");

  Options o;
  app.add_option("--proto", o.proto, "Transport protocol (tcp|udp)")->check(CLI::IsMember({"tcp", "udp"}));
  app.add_option("--window", o.window, "Sliding window in days")->capture_default_str();
  app.add_option("--top-k", o.top_k, "Ports reported per day")->capture_default_str();
  app.add_option("--idf", o.idf, "smoothed|common")->check(CLI::IsMember({"smoothed", "common"}))->capture_default_str();
  app.add_option("--tf", o.tf, "linear|log")->check(CLI::IsMember({"linear", "log"}))->capture_default_str();
  app.add_option("--stop-ports", o.stop_ports, "Comma-separated ports removed before scoring")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--threshold", o.threshold, "Noise threshold: auto or minimum accesses per day")->capture_default_str();
  app.add_option("--sweep-start", o.sweep_start, "First threshold of the automatic sweep")->capture_default_str();
  app.add_option("--bins", o.bins, "IDF histogram bins")->capture_default_str();
  app.add_option("--seed", o.seed, "Generator seed (synth)");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--format", o.format, "Record format (auto|ndjson|csv)")
      ->check(CLI::IsMember({"auto", "ndjson", "csv"}))
      ->capture_default_str();
  app.add_option("--input", o.inputs, "Record files");
  app.add_option("--corpus", o.corpus, "Corpus JSON file");
  app.add_option("--spec", o.spec, "Scenario JSON file (synth); default is the built-in scenario");
  app.add_option("--port", o.port, "Destination port to analyse");
  app.add_option("--from", o.from, "First day (YYYY-MM-DD)");
  app.add_option("--to", o.to, "Last day (YYYY-MM-DD)");
  app.add_option("--min-share", o.min_share, "Daily share a wave port must hold")->capture_default_str();
  app.add_option("--min-days", o.min_days, "Consecutive rotating days for a wave")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Aggregate records into a daily corpus");
  ingest->add_option("inputs", o.inputs, "Record files");
  auto* sweep = app.add_subcommand("sweep", "Select the noise threshold from IDF histograms");
  auto* scan = app.add_subcommand("scan", "Rank ports per day by TF-IDF over a sliding window");
  auto* wave = app.add_subcommand("wave", "Detect daily UDP port rotation and characterise the traffic");
  wave->add_option("inputs", o.inputs, "Record files");
  auto* isn = app.add_subcommand("isn", "Share of SYNs whose ISN equals the destination address");
  isn->add_option("inputs", o.inputs, "Record files");
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic telescope scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    int rc = kOk;
    if (ingest->parsed()) rc = cmd_ingest(o);
    else if (sweep->parsed()) rc = cmd_sweep(o);
    else if (scan->parsed()) rc = cmd_scan(o);
    else if (wave->parsed()) rc = cmd_wave(o);
    else if (isn->parsed()) rc = cmd_isn(o);
    else if (synth_cmd->parsed()) rc = cmd_synth(o);
    write_atomic(fs::path(o.out) / "effective_config.toml", app.config_to_str(true, false));
    return rc;
  } catch (const Error& e) {
    std::cerr << "port-tfidf: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "port-tfidf: internal error: " << e.what() << "\n";
    return kInternal;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace porttfidf::cli
