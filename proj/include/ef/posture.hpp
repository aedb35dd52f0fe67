#pragma once

// Seat assignment from pelvis x, pelvis-centered joint features and the
// per-seat lean classifiers.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ef/core.hpp"
#include "ef/mlp.hpp"

namespace ef {

enum class Seat { Left, Middle, Right };
enum class PostureLabel { LeanIn = 0, Neutral = 1, LeanOut = 2 };

inline constexpr std::array<Seat, 3> kSeats = {Seat::Left, Seat::Middle, Seat::Right};
inline constexpr std::size_t kPostureClasses = 3;
inline constexpr std::size_t kFeatureSize = kJointCount * 7;  // 224
inline constexpr Eigen::Index kDefaultHidden = 512;

std::string_view to_string(Seat seat) noexcept;            // "left" / "middle" / "right"
std::optional<Seat> seat_from_string(std::string_view s) noexcept;
std::string_view to_string(PostureLabel label) noexcept;   // "LeanIn" / "Neutral" / "LeanOut"
std::optional<PostureLabel> posture_from_string(std::string_view s) noexcept;

struct PostureConfig {
  double hysteresis = 0.15;  // meters of pelvis x travel before seats are recomputed
  Eigen::Index hidden = kDefaultHidden;
};

struct SeatAssignment {
  std::map<std::string, Seat> seats;
  std::map<std::string, double> pelvis_x;  // the frame the assignment was made from
};

// Left-to-right by pelvis x. Two bodies take Left/Right, one takes Middle.
// `prev` is returned (with refreshed pelvis_x) when it covers the same bodies
// and none moved hysteresis or more since the previous frame.
SeatAssignment assign_seats(std::span<const Body> bodies, const std::optional<SeatAssignment>& prev,
                            const PostureConfig& cfg);

using FeatureVector = Eigen::VectorXd;

// Per joint j: slots [7j, 7j+3) position minus pelvis, [7j+3, 7j+7) (w,x,y,z).
FeatureVector flatten_features(const Body& body);

using PostureModel = MlpModel<double>;
using PostureExample = LabeledExample<double>;

PostureModel make_posture_model(std::uint64_t seed, Eigen::Index hidden = kDefaultHidden);

class SeatModels {
 public:
  void set(Seat seat, PostureModel model) { models_.insert_or_assign(seat, std::move(model)); }
  bool has(Seat seat) const { return models_.contains(seat); }
  bool complete() const { return models_.size() == kSeats.size(); }
  const PostureModel& at(Seat seat) const;

 private:
  std::map<Seat, PostureModel> models_;
};

struct PostureResult {
  PostureLabel label = PostureLabel::Neutral;
  double confidence = 0.0;
};

PostureResult classify_posture(const SeatModels& models, Seat seat, const Body& body);

struct TrainingReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> losses;  // pre-step loss of every step
};

// Full-batch gradient descent for `steps` steps from a seeded uniform init.
std::pair<PostureModel, TrainingReport> train_posture_model(std::span<const PostureExample> data, int steps,
                                                            double lr, std::uint64_t seed,
                                                            Eigen::Index hidden = kDefaultHidden);

// Binary model file: "EFMLP1", three little-endian uint64 (inputs, hidden,
// classes), then W1, b1, W2, b2 row-major as little-endian float64.
void save_model(const PostureModel& model, const std::filesystem::path& path);
PostureModel load_model(const std::filesystem::path& path);

std::string model_file_name(Seat seat);  // "<seat>.efmlp"
SeatModels load_seat_models(const std::filesystem::path& dir);

}  // namespace ef
