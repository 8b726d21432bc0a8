#include "gsrsep/cli.hpp"

#include "gsrsep/annotation.hpp"
#include "gsrsep/dsp.hpp"
#include "gsrsep/ialm.hpp"
#include "gsrsep/io.hpp"
#include "gsrsep/metrics.hpp"
#include "gsrsep/nnsc.hpp"
#include "gsrsep/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace gsrsep::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kWorkingRateHz = 22050.0;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  double tol = 1e-5;
  double mu0 = 1e-3;
  double rho = 1.2;
  std::string lambda = "auto";
  std::string gamma = "auto";
  std::size_t max_iters = 1000;
  std::size_t threads = 1;
};

struct TrainOptions {
  std::string frames_from;
  std::size_t atoms = 100;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  std::size_t max_frames = 0;
  std::string lambda_dict = "auto";
  std::string out;
};

struct MergeOptions {
  std::vector<std::string> inputs;
  std::string out;
};

struct SeparateOptions {
  std::string mix;
  std::string method;
  std::string dict;
  std::string pitch;
  std::optional<double> frame_period;
  double mask_width_hz = 80.0;
  std::string out_voice;
  std::string out_music;
  std::string out_component_prefix;
  bool ratio_mask = false;
};

struct EvaluateOptions {
  std::string estimate;
  std::string reference;
  std::string mixture;
  std::vector<std::string> others;
  std::string batch;
  std::size_t filter_length = 1;
};

struct BenchOptions {
  std::string method = "gsr";
  std::size_t m = 706;
  std::size_t k = 100;
  std::vector<std::size_t> n = {500, 1000, 2000};
  std::uint64_t seed = 7;
  std::size_t iters = 50;
  std::size_t repeats = 1;
};

struct SynthOptions {
  double duration = 10.0;
  double train_duration = 20.0;
  std::uint64_t seed = 7;
  std::string out_dir;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::optional<double> parse_auto(const std::string& text, const char* flag) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + " expects a number or 'auto', got '" + text + "'");
  }
}

void check_globals(const GlobalOptions& g) {
  if (!(g.tol > 0.0)) throw UsageError("--tol must be positive");
  if (!(g.mu0 > 0.0)) throw UsageError("--mu0 must be positive");
  if (!(g.rho >= 1.0)) throw UsageError("--rho must be >= 1");
  if (g.max_iters == 0) throw UsageError("--max-iters must be >= 1");
  if (g.threads == 0) throw UsageError("--threads must be >= 1");
}

ialm::SolverConfig solver_config(const GlobalOptions& g, std::size_t m, std::size_t n, ialm::Method method) {
  auto cfg = ialm::default_config(m, n, method);
  cfg.tol = g.tol;
  cfg.mu0 = g.mu0;
  cfg.rho = g.rho;
  cfg.max_iters = g.max_iters;
  if (const auto l = parse_auto(g.lambda, "--lambda")) cfg.lambda = *l;
  if (const auto gm = parse_auto(g.gamma, "--gamma")) {
    if (ialm::is_informed(method)) cfg.gamma = *gm;
  }
  return cfg;
}

/// Loads a WAV and brings it to the working rate (only exact halving is
/// supported).
dsp::AudioClip load_audio(const fs::path& path, double rate = kWorkingRateHz) {
  auto clip = io::load_wav(path);
  if (clip.sample_rate_hz == rate) return clip;
  if (clip.sample_rate_hz == 2.0 * rate) return dsp::resample_half(clip, rate);
  throw InvalidArgument(path.string() + ": sample rate " + fmt("%.0f", clip.sample_rate_hz) + " Hz is not " +
                        fmt("%.0f", rate) + " or " + fmt("%.0f", 2.0 * rate) + " Hz");
}

std::vector<fs::path> wav_files(const fs::path& source) {
  if (fs::is_regular_file(source)) return {source};
  if (!fs::is_directory(source)) throw IoError("'" + source.string() + "' is neither a WAV file nor a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(source)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .wav files in '" + source.string() + "'");
  return files;
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<Matrix> blocks;
  Eigen::Index total = 0;
  for (const auto& path : wav_files(o.frames_from)) {
    const auto spec = dsp::stft(load_audio(path));
    total += spec.magnitude.cols();
    blocks.push_back(spec.magnitude);
  }
  Matrix frames(static_cast<Eigen::Index>(dsp::Framing{}.bins()), total);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    frames.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  if (o.max_frames > 0 && static_cast<Eigen::Index>(o.max_frames) < total) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(o.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(o.max_frames);
    std::sort(idx.begin(), idx.end());
    Matrix picked(frames.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) picked.col(static_cast<Eigen::Index>(i)) = frames.col(idx[i]);
    frames = std::move(picked);
  }

  nnsc::NnscConfig cfg;
  cfg.num_atoms = o.atoms;
  cfg.max_epochs = o.epochs;
  cfg.seed = o.seed;
  if (const auto l = parse_auto(o.lambda_dict, "--lambda-dict")) cfg.lambda_dict = *l;
  nnsc::NnscTrace trace;
  const auto dict = nnsc::train_dictionary(frames, cfg, &trace);
  io::save_dict(o.out, dict);
  err << "trained " << dict.size() << " atoms on " << frames.cols() << " frames (" << trace.objective.size()
      << " epochs, " << trace.reseeded_atoms << " atoms re-seeded)\n";
  out << o.out << "\n";
  return kOk;
}

int cmd_merge(const MergeOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<nnsc::Dictionary> dicts;
  for (const auto& in : o.inputs) dicts.push_back(io::load_dict(in));
  const auto merged = nnsc::concat_dictionaries(dicts);
  io::save_dict(o.out, merged);
  err << "merged " << dicts.size() << " dictionaries into " << merged.size() << " atoms\n";
  out << o.out << "\n";
  return kOk;
}

int cmd_separate(const SeparateOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const auto method = [&] {
    try {
      return ialm::parse_method(o.method);
    } catch (const InvalidArgument& e) {
      throw UsageError(std::string("--method: ") + e.what());
    }
  }();
  if (ialm::is_informed(method) && o.pitch.empty()) {
    throw UsageError("--method " + o.method + " requires --pitch");
  }
  if (ialm::uses_dictionary(method) && o.dict.empty()) {
    throw UsageError("--method " + o.method + " requires --dict");
  }
  if (o.out_voice.empty() && o.out_music.empty() && o.out_component_prefix.empty()) {
    throw UsageError("nothing to write: give --out-voice, --out-music or --out-component-prefix");
  }
  if (!ialm::uses_dictionary(method) && !o.dict.empty()) {
    err << "warning: --method " << o.method << " uses the identity dictionary; ignoring --dict\n";
  }
  if (!ialm::is_informed(method) && !o.pitch.empty()) {
    err << "warning: --method " << o.method << " is uninformed; ignoring --pitch\n";
  }

  std::optional<nnsc::Dictionary> dict;
  double rate = kWorkingRateHz;
  if (ialm::uses_dictionary(method)) {
    dict = io::load_dict(o.dict);
    rate = dict->sample_rate_hz;
  }
  const auto mix = load_audio(o.mix, rate);
  const auto spec = dsp::stft(mix);
  if (dict && (dict->bins() != spec.magnitude.rows() || dict->fft_size != spec.framing.fft_size)) {
    throw InvalidArgument("dictionary framing (" + std::to_string(dict->bins()) + " bins, fft " +
                          std::to_string(dict->fft_size) + ") does not match the mixture STFT");
  }

  ialm::ProblemSpec problem;
  problem.X = spec.magnitude;
  problem.method = method;
  if (dict) {
    problem.D = dict->atoms;
    problem.groups = dict->groups;
  }
  if (ialm::is_informed(method)) {
    const auto contour = io::parse_pitch(o.pitch, o.frame_period);
    const auto outside = annotation::frames_outside_contour(contour, spec.framing);
    if (outside > 0) {
      err << "warning: pitch contour does not cover " << outside << " of " << spec.framing.num_frames
          << " frames; treating them as unvoiced\n";
    }
    const Matrix mask = annotation::harmonic_mask(contour, spec.framing, o.mask_width_hz);
    problem.E0 = annotation::annotation_matrix(spec.magnitude, mask);
  }

  const auto cfg = solver_config(g, static_cast<std::size_t>(spec.magnitude.rows()),
                                 static_cast<std::size_t>(spec.magnitude.cols()), method);
  const auto sol = ialm::solve(problem, cfg);
  err << o.method << ": " << sol.iters << " iterations, residual " << fmt("%.3g", sol.residual_history.back())
      << (sol.converged ? "" : " (not converged)") << ", " << fmt("%.2f", sol.wall_time.count()) << " s\n";

  const auto sources = dsp::reconstruct_sources(sol, spec, {.ratio_mask = o.ratio_mask});
  if (!o.out_voice.empty()) {
    io::save_wav(o.out_voice, sources.voice);
    out << o.out_voice << "\n";
  }
  if (!o.out_music.empty()) {
    io::save_wav(o.out_music, sources.music);
    out << o.out_music << "\n";
  }
  if (!o.out_component_prefix.empty()) {
    if (!dict) {
      throw UsageError("--out-component-prefix needs a dictionary method");
    }
    if (!dict->groups || dict->groups->count() < 2) {
      err << "warning: dictionary has a single group; --out-component-prefix writes one stem\n";
    }
    const nnsc::Dictionary& d = *dict;
    const auto parts = nnsc::component_spectrograms(d, sol.Z);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string path = o.out_component_prefix + "_" + std::to_string(i + 1) + ".wav";
      io::save_wav(path, dsp::istft(parts[i].cwiseMax(0.0), spec.phase, spec.framing));
      out << path << "\n";
    }
  }
  return kOk;
}

struct EvalJob {
  std::string label;
  fs::path estimate, reference, mixture;
  std::vector<fs::path> others;
};

metrics::MetricReport run_eval(const EvalJob& job, std::size_t filter_length) {
  const auto est = io::load_wav(job.estimate);
  const auto ref = load_audio(job.reference, est.sample_rate_hz);
  const auto mix = load_audio(job.mixture, est.sample_rate_hz);
  std::vector<dsp::AudioClip> others;
  for (const auto& p : job.others) others.push_back(load_audio(p, est.sample_rate_hz));
  return metrics::evaluate(est, ref, mix, others, {.filter_length = filter_length});
}

std::string report_row(const metrics::MetricReport& r) {
  return fmt("%.4f", r.sdr_db) + "\t" + fmt("%.4f", r.sir_db) + "\t" + fmt("%.4f", r.sar_db) + "\t" +
         fmt("%.4f", r.nsdr_db);
}

std::vector<EvalJob> read_batch(const fs::path& list) {
  const auto bytes = io::read_file(list);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  const fs::path base = list.parent_path();
  auto resolve = [&](const std::string& s) { return fs::path(s).is_absolute() ? fs::path(s) : base / s; };
  std::vector<EvalJob> jobs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, '\t');) cols.push_back(c);
    if (cols.size() < 3) {
      throw ParseError(list.string() + ": line " + std::to_string(line_no) +
                           ": expected estimate<TAB>reference<TAB>mixture[<TAB>others...]",
                       line_no);
    }
    EvalJob job{cols[0], resolve(cols[0]), resolve(cols[1]), resolve(cols[2]), {}};
    for (std::size_t i = 3; i < cols.size(); ++i) job.others.push_back(resolve(cols[i]));
    jobs.push_back(std::move(job));
  }
  if (jobs.empty()) throw ParseError(list.string() + ": no clips listed", line_no);
  return jobs;
}

int cmd_evaluate(const EvaluateOptions& o, const GlobalOptions& g, std::ostream& out) {
  if (o.batch.empty()) {
    if (o.estimate.empty() || o.reference.empty() || o.mixture.empty()) {
      throw UsageError("evaluate needs --estimate, --reference and --mixture (or --batch)");
    }
    EvalJob job{o.estimate, o.estimate, o.reference, o.mixture, {}};
    for (const auto& p : o.others) job.others.emplace_back(p);
    out << "sdr_db\tsir_db\tsar_db\tnsdr_db\n" << report_row(run_eval(job, o.filter_length)) << "\n";
    return kOk;
  }
  if (!o.estimate.empty() || !o.reference.empty() || !o.mixture.empty()) {
    throw UsageError("--batch cannot be combined with --estimate/--reference/--mixture");
  }
  const auto jobs = read_batch(o.batch);
  std::vector<metrics::MetricReport> reports(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        reports[i] = run_eval(jobs[i], o.filter_length);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(g.threads, jobs.size()); ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  out << "clip\tsdr_db\tsir_db\tsar_db\tnsdr_db\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) out << jobs[i].label << "\t" << report_row(reports[i]) << "\n";
  out << "G\t" << report_row(metrics::mean_report(reports)) << "\n";
  return kOk;
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  const auto method = [&] {
    try {
      return ialm::parse_method(o.method);
    } catch (const InvalidArgument& e) {
      throw UsageError(std::string("--method: ") + e.what());
    }
  }();
  const auto report = synth::run_scaling(method, o.m, o.k, o.n, o.seed, {.iters = o.iters, .repeats = o.repeats});
  out << "n\tmethod\tseconds_per_iter\ttotal_seconds\titers\n";
  for (const auto& row : report) {
    out << row.n << "\t" << ialm::to_string(row.method) << "\t" << fmt("%.6g", row.seconds_per_iter) << "\t"
        << fmt("%.6g", row.total_seconds) << "\t" << row.iters << "\n";
  }
  return kOk;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  const fs::path dir(o.out_dir);
  fs::create_directories(dir / "train");
  const auto fx = synth::gen_audio_fixture(o.duration, o.seed);
  const auto train = synth::gen_instrument_training(o.train_duration, o.seed);
  const std::vector<std::pair<fs::path, const dsp::AudioClip*>> clips = {
      {dir / "mixture.wav", &fx.mixture},
      {dir / "voice.wav", &fx.voice},
      {dir / "music.wav", &fx.music},
      {dir / "train" / "music_train.wav", &train},
  };
  for (const auto& [path, clip] : clips) {
    io::save_wav(path, *clip);
    out << path.string() << "\n";
  }
  io::write_pitch(dir / "pitch.csv", fx.contour);
  out << (dir / "pitch.csv").string() << "\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Singing-voice separation with group-sparse and low-rank models", "gsrsep"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--tol", g.tol, "Relative residual tolerance")->capture_default_str();
  app.add_option("--mu0", g.mu0, "Initial penalty")->capture_default_str();
  app.add_option("--rho", g.rho, "Penalty growth factor")->capture_default_str();
  app.add_option("--lambda", g.lambda, "Sparsity weight, or 'auto' for 1/sqrt(max(m,n))")->capture_default_str();
  app.add_option("--gamma", g.gamma, "Annotation weight, or 'auto' for 2/sqrt(max(m,n))")->capture_default_str();
  app.add_option("--max-iters", g.max_iters, "Iteration cap")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for batch jobs")->capture_default_str();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train-dict", "Train a non-negative dictionary from WAV files");
  train_cmd->add_option("--frames-from", train.frames_from, "WAV file or directory of WAV files")->required();
  train_cmd->add_option("--atoms", train.atoms, "Number of atoms")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--max-frames", train.max_frames, "Subsample this many frames (0 = all)")
      ->capture_default_str();
  train_cmd->add_option("--lambda-dict", train.lambda_dict, "Sparsity weight, or 'auto' for 1/sqrt(m)")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output dictionary file")->required();

  MergeOptions merge;
  auto* merge_cmd = app.add_subcommand("merge-dicts", "Concatenate dictionaries into one grouped dictionary");
  merge_cmd->add_option("inputs", merge.inputs, "Dictionary files, one group each")->required();
  merge_cmd->add_option("--out", merge.out, "Output dictionary file")->required();

  SeparateOptions sep;
  auto* sep_cmd = app.add_subcommand("separate", "Separate a mixture into voice and accompaniment");
  sep_cmd->add_option("--mix", sep.mix, "Mixture WAV")->required();
  sep_cmd->add_option("--method", sep.method, "rpca|rpcai|lrr|lrri|gsr|gsri")->required();
  sep_cmd->add_option("--dict", sep.dict, "Dictionary file (lrr/gsr families)");
  sep_cmd->add_option("--pitch", sep.pitch, "Vocal pitch CSV (informed methods)");
  sep_cmd->add_option("--frame-period", sep.frame_period, "Read --pitch as one f0 per line at this period (s)");
  sep_cmd->add_option("--mask-width-hz", sep.mask_width_hz, "Harmonic mask width")->capture_default_str();
  sep_cmd->add_option("--out-voice", sep.out_voice, "Voice WAV to write");
  sep_cmd->add_option("--out-music", sep.out_music, "Accompaniment WAV to write");
  sep_cmd->add_option("--out-component-prefix", sep.out_component_prefix,
                      "Write one accompaniment stem per dictionary group as PREFIX_<g>.wav");
  sep_cmd->add_flag("--ratio-mask", sep.ratio_mask, "Redistribute the mixture magnitude by the estimated ratio");

  EvaluateOptions ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Compute SDR/SIR/SAR/NSDR");
  ev_cmd->add_option("--estimate", ev.estimate, "Estimated source WAV");
  ev_cmd->add_option("--reference", ev.reference, "True source WAV");
  ev_cmd->add_option("--mixture", ev.mixture, "Mixture WAV");
  ev_cmd->add_option("--others", ev.others, "Interfering source WAVs (repeatable)");
  ev_cmd->add_option("--batch", ev.batch, "TSV of estimate, reference, mixture[, others...] per line");
  ev_cmd->add_option("--filter-length", ev.filter_length, "Taps of the distortion filter")->capture_default_str();

  auto* bench_cmd = app.add_subcommand("bench", "Timing harness");
  bench_cmd->require_subcommand(1);
  BenchOptions bench;
  auto* scaling_cmd = bench_cmd->add_subcommand("scaling", "Per-iteration time against the number of frames");
  scaling_cmd->add_option("--method", bench.method, "Solver")->capture_default_str();
  scaling_cmd->add_option("--m", bench.m, "Rows of X")->capture_default_str();
  scaling_cmd->add_option("--k", bench.k, "Atoms")->capture_default_str();
  scaling_cmd->add_option("--n", bench.n, "Comma-separated frame counts")->delimiter(',')->capture_default_str();
  scaling_cmd->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  scaling_cmd->add_option("--iters", bench.iters, "Fixed iterations per solve")->capture_default_str();
  scaling_cmd->add_option("--repeats", bench.repeats, "Keep the fastest of this many runs")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "Synthetic data");
  synth_cmd->require_subcommand(1);
  SynthOptions syn;
  auto* fixture_cmd = synth_cmd->add_subcommand("fixture", "Write a synthetic song with ground truth");
  fixture_cmd->add_option("--duration", syn.duration, "Mixture length (s)")->capture_default_str();
  fixture_cmd->add_option("--train-duration", syn.train_duration, "Length of the accompaniment training clip (s)")
      ->capture_default_str();
  fixture_cmd->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
  fixture_cmd->add_option("--out-dir", syn.out_dir, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    check_globals(g);
    if (*train_cmd) return cmd_train(train, out, err);
    if (*merge_cmd) return cmd_merge(merge, out, err);
    if (*sep_cmd) return cmd_separate(sep, g, out, err);
    if (*ev_cmd) return cmd_evaluate(ev, g, out);
    if (*scaling_cmd) return cmd_bench(bench, out);
    if (*fixture_cmd) return cmd_synth(syn, out);
    err << app.help();
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace gsrsep::cli
