#include "ef/posture.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace ef {

std::string_view to_string(Seat seat) noexcept {
  switch (seat) {
    case Seat::Left: return "left";
    case Seat::Middle: return "middle";
    case Seat::Right: return "right";
  }
  return "unknown";
}

std::optional<Seat> seat_from_string(std::string_view s) noexcept {
  for (Seat seat : kSeats)
    if (to_string(seat) == s) return seat;
  return std::nullopt;
}

std::string_view to_string(PostureLabel label) noexcept {
  switch (label) {
    case PostureLabel::LeanIn: return "LeanIn";
    case PostureLabel::Neutral: return "Neutral";
    case PostureLabel::LeanOut: return "LeanOut";
  }
  return "Unknown";
}

std::optional<PostureLabel> posture_from_string(std::string_view s) noexcept {
  for (PostureLabel l : {PostureLabel::LeanIn, PostureLabel::Neutral, PostureLabel::LeanOut})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

SeatAssignment assign_seats(std::span<const Body> bodies, const std::optional<SeatAssignment>& prev,
                            const PostureConfig& cfg) {
  if (bodies.size() > kSeats.size()) {
    throw Error(Errc::TooManyBodies, std::to_string(bodies.size()) + " bodies, at most 3 seats");
  }
  std::set<std::string> ids;
  for (const Body& b : bodies) {
    if (!ids.insert(b.id).second) throw Error(Errc::DuplicateBodyId, "body id '" + b.id + "' repeated");
  }

  SeatAssignment out;
  for (const Body& b : bodies) out.pelvis_x[b.id] = b.position(JointId::Pelvis).x();

  if (prev && prev->seats.size() == bodies.size()) {
    bool steady = true;
    for (const Body& b : bodies) {
      auto it = prev->pelvis_x.find(b.id);
      if (it == prev->pelvis_x.end() || !prev->seats.contains(b.id) ||
          !(std::abs(out.pelvis_x[b.id] - it->second) < cfg.hysteresis)) {
        steady = false;
        break;
      }
    }
    if (steady) {
      out.seats = prev->seats;
      return out;
    }
  }

  std::vector<std::pair<double, std::string>> order;
  for (const auto& [id, x] : out.pelvis_x) order.emplace_back(x, id);
  std::sort(order.begin(), order.end());
  static const std::vector<Seat> one{Seat::Middle}, two{Seat::Left, Seat::Right},
      three{Seat::Left, Seat::Middle, Seat::Right};
  const std::vector<Seat>& layout = order.size() == 1 ? one : order.size() == 2 ? two : three;
  for (std::size_t i = 0; i < order.size(); ++i) out.seats[order[i].second] = layout[i];
  return out;
}

FeatureVector flatten_features(const Body& body) {
  FeatureVector f(static_cast<Eigen::Index>(kFeatureSize));
  const Vec3 pelvis = body.position(JointId::Pelvis);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const Joint& joint = body.joints.at(j);
    const auto base = static_cast<Eigen::Index>(7 * j);
    f.segment<3>(base) = joint.position - pelvis;
    f.segment<4>(base + 3) = joint.orientation;
  }
  return f;
}

PostureModel make_posture_model(std::uint64_t seed, Eigen::Index hidden) {
  return PostureModel::uniform(static_cast<Eigen::Index>(kFeatureSize), hidden,
                               static_cast<Eigen::Index>(kPostureClasses), seed);
}

const PostureModel& SeatModels::at(Seat seat) const {
  auto it = models_.find(seat);
  if (it == models_.end()) {
    throw Error(Errc::MissingSeatModel, "no posture model for seat '" + std::string(to_string(seat)) + "'");
  }
  return it->second;
}

PostureResult classify_posture(const SeatModels& models, Seat seat, const Body& body) {
  const PostureModel& model = models.at(seat);
  const Eigen::VectorXd p = mlp_forward(model, flatten_features(body));
  const Eigen::Index best = argmax_first<double>(p);
  return {static_cast<PostureLabel>(best), p[best]};
}

std::pair<PostureModel, TrainingReport> train_posture_model(std::span<const PostureExample> data, int steps,
                                                            double lr, std::uint64_t seed, Eigen::Index hidden) {
  if (data.empty()) throw Error(Errc::EmptyBatch, "no posture examples to train on");
  PostureModel model = make_posture_model(seed, hidden);
  TrainingReport report;
  for (int step = 0; step < steps; ++step) {
    auto [next, loss] = mlp_train_step(model, data, lr);
    report.losses.push_back(loss);
    model = std::move(next);
  }
  report.final_loss = mlp_loss(model, data);
  report.initial_loss = report.losses.empty() ? report.final_loss : report.losses.front();
  report.accuracy = mlp_accuracy(model, data);
  return {std::move(model), std::move(report)};
}

namespace {

constexpr char kMagic[6] = {'E', 'F', 'M', 'L', 'P', '1'};

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.write(bytes, 8);
}

template <typename T>
T read_le(std::istream& in, const std::filesystem::path& path) {
  char bytes[8];
  if (!in.read(bytes, 8)) throw Error(Errc::ParseError, "truncated model file " + path.string());
  std::uint64_t bits;
  std::memcpy(&bits, bytes, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

template <typename M>
void write_row_major(std::ostream& out, const M& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) write_le<double>(out, m(i, j));
}

template <typename M>
void read_row_major(std::istream& in, M& m, const std::filesystem::path& path) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = read_le<double>(in, path);
}

}  // namespace

void save_model(const PostureModel& model, const std::filesystem::path& path) {
  if (!model.consistent()) throw Error(Errc::ShapeMismatch, "refusing to save an inconsistent model");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.input_size()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.hidden_size()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.class_count()));
  write_row_major(out, model.w1);
  write_row_major(out, model.b1);
  write_row_major(out, model.w2);
  write_row_major(out, model.b2);
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

PostureModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingModelFile, "cannot open " + path.string());
  char magic[6];
  if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0) {
    throw Error(Errc::ParseError, "bad model header in " + path.string());
  }
  const auto inputs = read_le<std::uint64_t>(in, path);
  const auto hidden = read_le<std::uint64_t>(in, path);
  const auto classes = read_le<std::uint64_t>(in, path);
  constexpr std::uint64_t kLimit = 1u << 20;
  if (inputs == 0 || hidden == 0 || classes == 0 || inputs > kLimit || hidden > kLimit || classes > kLimit) {
    throw Error(Errc::ParseError, "implausible model shape in " + path.string());
  }
  PostureModel model = PostureModel::zeros(static_cast<Eigen::Index>(inputs), static_cast<Eigen::Index>(hidden),
                                           static_cast<Eigen::Index>(classes));
  read_row_major(in, model.w1, path);
  read_row_major(in, model.b1, path);
  read_row_major(in, model.w2, path);
  read_row_major(in, model.b2, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(Errc::ParseError, "trailing bytes in model file " + path.string());
  }
  if (!model.finite()) throw Error(Errc::ParseError, "non-finite parameters in " + path.string());
  return model;
}

std::string model_file_name(Seat seat) { return std::string(to_string(seat)) + ".efmlp"; }

SeatModels load_seat_models(const std::filesystem::path& dir) {
  SeatModels models;
  for (Seat seat : kSeats) {
    const auto path = dir / model_file_name(seat);
    if (!std::filesystem::exists(path)) {
      throw Error(Errc::MissingModelFile, "missing posture model " + path.string());
    }
    PostureModel model = load_model(path);
    if (model.input_size() != static_cast<Eigen::Index>(kFeatureSize) ||
        model.class_count() != static_cast<Eigen::Index>(kPostureClasses)) {
      throw Error(Errc::ParseError, "posture model " + path.string() + " has the wrong shape");
    }
    models.set(seat, std::move(model));
  }
  return models;
}

}  // namespace ef
