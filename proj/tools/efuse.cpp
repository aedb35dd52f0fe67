// efuse: replay recorded sessions, generate synthetic ones, train posture
// models and validate frame files.
//
// Exit codes: 0 success, 1 input error, 2 internal failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ef/io.hpp"
#include "ef/replay.hpp"
#include "ef/simulator.hpp"

namespace {

constexpr int kInputError = 1;
constexpr int kInternalError = 2;

void print_summary(const ef::ReplaySummary& s) {
  std::cout << "frames_read " << s.frames_read << "\n"
            << "processed " << s.processed << "\n"
            << "rejected " << s.rejected << "\n"
            << "violations " << s.violations << "\n";
  for (ef::EventKind kind : {ef::EventKind::DominatedDiscussion, ef::EventKind::JointAttention,
                             ef::EventKind::Disengagement, ef::EventKind::PointingSelection}) {
    auto it = s.events.find(kind);
    std::cout << ef::to_string(kind) << ' ' << (it == s.events.end() ? 0 : it->second) << "\n";
  }
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

int cmd_replay(const ef::SessionPaths& paths) {
  print_summary(ef::run_replay(paths));
  return 0;
}

struct SimulateArgs {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string out_frames, out_truth, out_objects, out_labels;
  int per_class = 200;
};

int cmd_simulate(const SimulateArgs& a) {
  std::vector<std::string> frames, truth, labels;
  ef::ObjectRegistry objects = ef::weights_task_objects();
  if (a.scenario == "posture_training") {
    const ef::PostureTrainingSet set = ef::posture_training_set(a.per_class, a.seed);
    for (const auto& f : set.frames) frames.push_back(ef::serialize_frame(f));
    for (const auto& l : set.labels) labels.push_back(ef::serialize_label(l));
  } else {
    const ef::Scenario sc = ef::build_scenario(ef::builtin_scenario(a.scenario, a.seed));
    for (const auto& f : sc.frames) frames.push_back(ef::serialize_frame(f));
    for (const auto& e : sc.truth) truth.push_back(ef::serialize_event(e));
    objects = sc.objects;
  }
  ef::write_text_file(a.out_frames, join_lines(frames));
  ef::write_text_file(a.out_truth, join_lines(truth));
  if (!a.out_objects.empty()) ef::write_text_file(a.out_objects, ef::serialize_object_registry(objects));
  if (!a.out_labels.empty()) ef::write_text_file(a.out_labels, join_lines(labels));
  std::cout << "frames " << frames.size() << "\ntruth_events " << truth.size() << "\n";
  return 0;
}

struct TrainArgs {
  std::string frames, labels, seat, out;
  int epochs = 200;
  double lr = 1e-2;
  std::uint64_t seed = 1;
  int hidden = static_cast<int>(ef::kDefaultHidden);
};

std::vector<ef::SkeletonFrame> read_valid_frames(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ef::Error(ef::Errc::Io, "cannot read frames " + path);
  std::vector<ef::SkeletonFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    frames.push_back(ef::parse_frame_line(line, line_no));
  }
  return frames;
}

int cmd_train(const TrainArgs& a) {
  const auto seat = ef::seat_from_string(a.seat);
  if (!seat) throw ef::Error(ef::Errc::InvalidConfig, "seat must be left, middle or right");
  if (a.epochs < 0) throw ef::Error(ef::Errc::InvalidConfig, "epochs must be non-negative");
  if (a.hidden < 1) throw ef::Error(ef::Errc::InvalidConfig, "hidden width must be positive");
  const auto frames = read_valid_frames(a.frames);
  const auto labels = ef::read_label_file(a.labels);
  const auto examples = ef::collect_posture_examples(frames, labels, *seat);
  if (examples.empty()) throw ef::Error(ef::Errc::InvalidConfig, "no labeled bodies found for seat " + a.seat);
  auto [model, report] = ef::train_posture_model(examples, a.epochs, a.lr, a.seed, a.hidden);
  ef::save_model(model, a.out);
  std::cout << "examples " << examples.size() << "\ninitial_loss " << report.initial_loss << "\nfinal_loss "
            << report.final_loss << "\naccuracy " << report.accuracy << "\n";
  return 0;
}

int cmd_check(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ef::Error(ef::Errc::Io, "cannot read frames " + path);
  std::string line;
  std::size_t line_no = 0, frames = 0, bad = 0;
  std::optional<double> last_t;
  bool ordered = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++frames;
    const ef::ParsedFrame parsed = ef::parse_frame_record(line, line_no);
    if (last_t && !(parsed.frame.t > *last_t)) {
      std::cout << "line " << line_no << ": timestamp " << ef::format_number(parsed.frame.t)
                << " does not follow " << ef::format_number(*last_t) << "\n";
      ordered = false;
    }
    last_t = parsed.frame.t;
    if (parsed.violations.empty()) continue;
    ++bad;
    for (const ef::Violation& v : parsed.violations) {
      std::cout << "line " << line_no << ": " << ef::to_string(v.kind) << " " << v.subject;
      if (v.index >= 0) std::cout << " [" << v.index << "]";
      std::cout << "\n";
    }
  }
  std::cout << "frames " << frames << "\ninvalid " << bad << "\n";
  return bad == 0 && ordered ? 0 : kInputError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal group engagement analytics"};
  app.require_subcommand(1);

  ef::SessionPaths paths;
  std::string config, models;
  auto* replay = app.add_subcommand("replay", "Replay a frames file and write engagement events");
  replay->add_option("--frames", paths.frames, "Frames file (one JSON record per line)")->required();
  replay->add_option("--objects", paths.objects, "Task objects file")->required();
  replay->add_option("--config", config, "key=value config file");
  replay->add_option("--models", models, "Directory holding left/middle/right.efmlp posture models");
  replay->add_option("--out", paths.output, "Events output file")->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic session and its ground truth");
  simulate->add_option("--scenario", sim.scenario, "weights_task, dominated_engaged, dominated_disengaged "
                                                   "or posture_training")
      ->required();
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--out-frames", sim.out_frames, "Frames output file")->required();
  simulate->add_option("--out-truth", sim.out_truth, "Ground-truth events output file")->required();
  simulate->add_option("--out-objects", sim.out_objects, "Task objects output file");
  simulate->add_option("--out-labels", sim.out_labels, "Posture labels output file (posture_training)");
  simulate->add_option("--per-class", sim.per_class, "Samples per class and seat (posture_training)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-posture", "Train one seat's posture classifier");
  train_cmd->add_option("--frames", train.frames, "Frames file")->required();
  train_cmd->add_option("--labels", train.labels, "Labels file")->required();
  train_cmd->add_option("--seat", train.seat, "left, middle or right")->required();
  train_cmd->add_option("--epochs", train.epochs, "Full-batch gradient steps");
  train_cmd->add_option("--lr", train.lr, "Learning rate");
  train_cmd->add_option("--seed", train.seed, "Initialization seed");
  train_cmd->add_option("--hidden", train.hidden, "Hidden layer width");
  train_cmd->add_option("--out", train.out, "Model output file")->required();

  std::string check_frames;
  auto* check = app.add_subcommand("check", "Validate a frames file");
  check->add_option("--frames", check_frames, "Frames file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*replay) {
      if (!config.empty()) paths.config = config;
      if (!models.empty()) paths.models = models;
      return cmd_replay(paths);
    }
    if (*simulate) return cmd_simulate(sim);
    if (*train_cmd) return cmd_train(train);
    if (*check) return cmd_check(check_frames);
  } catch (const ef::Error& e) {
    std::cerr << "efuse: " << ef::to_string(e.code()) << ": " << e.what() << "\n";
    return ef::is_input_error(e.code()) ? kInputError : kInternalError;
  } catch (const std::exception& e) {
    std::cerr << "efuse: internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}
