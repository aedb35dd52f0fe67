#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <unistd.h>

#include "ef/posture.hpp"
#include "ef/replay.hpp"
#include "ef/simulator.hpp"
#include "support.hpp"

using namespace ef;

namespace {

using Model = MlpModel<double>;

Body body_at(const std::string& id, double pelvis_x) {
  Body b;
  b.id = id;
  for (auto& j : b.joints) j.position = Vec3(pelvis_x, 0.45, 2.5);
  return b;
}

Body simulated_body(std::mt19937_64& rng) {
  Body b = synth_body("S", Seat::Left, PostureLabel::LeanIn, idle_look(Seat::Left), 0.002, rng);
  std::normal_distribution<double> g(0, 1);
  for (auto& j : b.joints) j.orientation = Quat4(g(rng), g(rng), g(rng), g(rng)).normalized();
  return b;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ef_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

}  // namespace

TEST_SUITE("mlp") {
  TEST_CASE("zero model is uniform and has loss ln 3") {
    const Model m = Model::zeros(224, 64, 3);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0, 1);
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(224, [&] { return g(rng); });
    const Eigen::VectorXd p = mlp_forward(m, x);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(p[i] - 1.0 / 3.0) <= 1e-12);

    std::vector<LabeledExample<double>> batch;
    for (int i = 0; i < 7; ++i) batch.push_back({Eigen::VectorXd::NullaryExpr(224, [&] { return g(rng); }), i % 3});
    CHECK(std::abs(mlp_loss<double>(m, batch) - std::log(3.0)) <= 1e-9);
  }

  TEST_CASE("softmax of a biased output") {
    Model m = Model::zeros(4, 2, 3);
    m.b2 << 10, 0, 0;
    const Eigen::VectorXd p = mlp_forward(m, Eigen::VectorXd::Ones(4));
    // e^10 / (e^10 + 2) and 1 / (e^10 + 2)
    CHECK(std::abs(p[0] - 0.99991) <= 1e-6);
    CHECK(std::abs(p[1] - 4.54e-5) <= 1e-6);
    CHECK(std::abs(p[2] - 4.54e-5) <= 1e-6);
  }

  TEST_CASE("probabilities are positive and sum to one") {
    std::mt19937_64 rng(1000);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 1000; ++trial) {
      Model m = Model::uniform(12, 9, 3, static_cast<std::uint64_t>(trial));
      m.b2 *= 20.0 * std::abs(g(rng));
      const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(12, [&] { return 5.0 * g(rng); });
      const Eigen::VectorXd p = mlp_forward(m, x);
      CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
      CHECK((p.array() > 0.0).all());
    }
  }

  TEST_CASE("a zero learning rate leaves the model alone") {
    const Model m = Model::uniform(5, 4, 3, 9);
    std::vector<LabeledExample<double>> batch{{Eigen::VectorXd::Ones(5), 1}, {-Eigen::VectorXd::Ones(5), 2}};
    const auto [next, loss] = mlp_train_step<double>(m, batch, 0.0);
    CHECK(next == m);
    CHECK(loss == mlp_loss<double>(m, batch));
  }

  TEST_CASE("empty batches and bad shapes are errors") {
    const Model m = Model::zeros(5, 4, 3);
    std::vector<LabeledExample<double>> none;
    CHECK(error_of([&] { mlp_train_step<double>(m, none, 0.1); }) == Errc::EmptyBatch);
    std::vector<LabeledExample<double>> wrong{{Eigen::VectorXd::Ones(6), 0}};
    CHECK(error_of([&] { mlp_loss<double>(m, wrong); }) == Errc::ShapeMismatch);
    CHECK(error_of([&] { mlp_forward(m, Eigen::VectorXd::Ones(2)); }) == Errc::ShapeMismatch);
  }

  TEST_CASE("backpropagation agrees with central differences") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const eft::GradientCheck check = eft::gradient_check(seed);
      CHECK(check.checked == 20);
      CHECK(check.worst < 1e-4);
    }
  }

  TEST_CASE("uniform init respects the fan-in bound") {
    const Model m = Model::uniform(224, 64, 3, 5);
    CHECK(m.w1.rows() == 64);
    CHECK(m.w1.cols() == 224);
    CHECK(m.w2.rows() == 3);
    CHECK(m.w2.cols() == 64);
    CHECK(m.w1.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(224.0));
    CHECK(m.b1.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(224.0));
    CHECK(m.w2.cwiseAbs().maxCoeff() <= 1.0 / 8.0);
    CHECK(Model::uniform(224, 64, 3, 5) == m);
    CHECK_FALSE(Model::uniform(224, 64, 3, 6) == m);
  }
}

TEST_SUITE("posture") {
  TEST_CASE("seats follow pelvis x") {
    const std::vector<Body> three{body_at("A", -0.8), body_at("B", 0.1), body_at("C", 0.7)};
    const SeatAssignment s = assign_seats(three, std::nullopt, PostureConfig{});
    CHECK(s.seats.at("A") == Seat::Left);
    CHECK(s.seats.at("B") == Seat::Middle);
    CHECK(s.seats.at("C") == Seat::Right);

    const std::vector<Body> two{body_at("X", 0.4), body_at("Y", -0.2)};
    const SeatAssignment t = assign_seats(two, std::nullopt, PostureConfig{});
    CHECK(t.seats.at("Y") == Seat::Left);
    CHECK(t.seats.at("X") == Seat::Right);

    const std::vector<Body> one{body_at("Z", 0.9)};
    CHECK(assign_seats(one, std::nullopt, PostureConfig{}).seats.at("Z") == Seat::Middle);
  }

  TEST_CASE("small moves keep the previous assignment") {
    const std::vector<Body> before{body_at("A", -0.8), body_at("B", 0.1), body_at("C", 0.7)};
    const SeatAssignment s = assign_seats(before, std::nullopt, PostureConfig{});
    const std::vector<Body> after{body_at("A", -0.8), body_at("B", 0.12), body_at("C", 0.7)};
    CHECK(assign_seats(after, s, PostureConfig{}).seats == s.seats);

    // Drift below the hysteresis keeps the seats; a real move recomputes them.
    SeatAssignment held = s;
    const std::vector<Body> creep{body_at("A", -0.8), body_at("B", 0.2), body_at("C", 0.7)};
    held = assign_seats(creep, held, PostureConfig{});
    CHECK(held.seats == s.seats);
    const std::vector<Body> jump{body_at("A", -0.8), body_at("B", 0.9), body_at("C", 0.7)};
    const SeatAssignment moved = assign_seats(jump, held, PostureConfig{});
    CHECK(moved.seats.at("B") == Seat::Right);
    CHECK(moved.seats.at("C") == Seat::Middle);
  }

  TEST_CASE("seat errors") {
    const std::vector<Body> four{body_at("A", 0), body_at("B", 1), body_at("C", 2), body_at("D", 3)};
    CHECK(error_of([&] { assign_seats(four, std::nullopt, PostureConfig{}); }) == Errc::TooManyBodies);
    const std::vector<Body> twins{body_at("A", 0), body_at("A", 1)};
    CHECK(error_of([&] { assign_seats(twins, std::nullopt, PostureConfig{}); }) == Errc::DuplicateBodyId);
  }

  TEST_CASE("fresh assignments are injective and ordered") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 300; ++i) {
      std::vector<Body> bodies;
      const int n = 1 + i % 3;
      for (int k = 0; k < n; ++k) bodies.push_back(body_at(std::string(1, char('A' + k)), u(rng)));
      const SeatAssignment s = assign_seats(bodies, std::nullopt, PostureConfig{});
      std::set<Seat> used;
      for (const auto& [id, seat] : s.seats) used.insert(seat);
      CHECK(used.size() == bodies.size());
      for (const Body& a : bodies)
        for (const Body& b : bodies)
          if (a.position(JointId::Pelvis).x() < b.position(JointId::Pelvis).x())
            CHECK(static_cast<int>(s.seats.at(a.id)) < static_cast<int>(s.seats.at(b.id)));
    }
  }

  TEST_CASE("features are pelvis-centered") {
    std::mt19937_64 rng(4);
    Body b = simulated_body(rng);
    const FeatureVector f = flatten_features(b);
    CHECK(f.size() == 224);
    CHECK(f.segment<3>(0) == Vec3::Zero());
    for (std::size_t j = 0; j < kJointCount; ++j) {
      CHECK(f.segment<4>(static_cast<Eigen::Index>(7 * j + 3)) == b.joints[j].orientation);
    }

    Body shifted = b;
    for (auto& j : shifted.joints) j.position += Vec3(1, 2, 3);
    CHECK((flatten_features(shifted) - f).cwiseAbs().maxCoeff() < 1e-12);

    Body nose = body_at("N", 0.3);
    nose.joint(JointId::Nose).position = nose.position(JointId::Pelvis) + Vec3(0, 0.6, 0.1);
    const FeatureVector g = flatten_features(nose);
    const auto slot = static_cast<Eigen::Index>(7 * static_cast<int>(JointId::Nose));
    CHECK((g.segment<3>(slot) - Vec3(0, 0.6, 0.1)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("classification examples") {
    SeatModels models;
    models.set(Seat::Left, Model::zeros(224, 64, 3));
    const PostureResult zero = classify_posture(models, Seat::Left, body_at("A", -0.7));
    CHECK(zero.label == PostureLabel::LeanIn);
    CHECK(std::abs(zero.confidence - 1.0 / 3.0) < 1e-12);

    Model neutral = Model::zeros(224, 64, 3);
    neutral.b2 << 0, 10, 0;
    models.set(Seat::Middle, neutral);
    const PostureResult n = classify_posture(models, Seat::Middle, body_at("B", 0));
    CHECK(n.label == PostureLabel::Neutral);
    CHECK(std::abs(n.confidence - 0.99991) < 1e-5);

    CHECK(error_of([&] { classify_posture(models, Seat::Right, body_at("C", 0.7)); }) == Errc::MissingSeatModel);
    CHECK_FALSE(models.complete());
  }

  TEST_CASE("model files round-trip bit for bit") {
    const auto dir = scratch_dir("models");
    PostureModel m = make_posture_model(42, 64);
    m.b2[1] = -0.0;
    m.w1(3, 5) = 1e-310;  // subnormal
    save_model(m, dir / "m.efmlp");
    const PostureModel back = load_model(dir / "m.efmlp");
    REQUIRE(back.w1.rows() == 64);
    CHECK(std::memcmp(back.w1.data(), m.w1.data(), sizeof(double) * std::size_t(m.w1.size())) == 0);
    CHECK(std::memcmp(back.b1.data(), m.b1.data(), sizeof(double) * std::size_t(m.b1.size())) == 0);
    CHECK(std::memcmp(back.w2.data(), m.w2.data(), sizeof(double) * std::size_t(m.w2.size())) == 0);
    CHECK(std::memcmp(back.b2.data(), m.b2.data(), sizeof(double) * std::size_t(m.b2.size())) == 0);
    CHECK(std::signbit(back.b2[1]));

    std::ifstream raw(dir / "m.efmlp", std::ios::binary);
    char magic[6];
    raw.read(magic, 6);
    CHECK(std::string(magic, 6) == "EFMLP1");

    {
      std::ofstream bad(dir / "bad.efmlp", std::ios::binary);
      bad << "NOTMLP and some bytes";
    }
    CHECK(error_of([&] { load_model(dir / "bad.efmlp"); }) == Errc::ParseError);
    CHECK(error_of([&] { load_model(dir / "absent.efmlp"); }) == Errc::MissingModelFile);

    std::filesystem::resize_file(dir / "m.efmlp", std::filesystem::file_size(dir / "m.efmlp") - 8);
    CHECK(error_of([&] { load_model(dir / "m.efmlp"); }) == Errc::ParseError);

    save_model(m, dir / "left.efmlp");
    CHECK(error_of([&] { load_seat_models(dir); }) == Errc::MissingModelFile);
    save_model(m, dir / "middle.efmlp");
    save_model(m, dir / "right.efmlp");
    CHECK(load_seat_models(dir).complete());
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("training lowers the loss on simulated poses") {
    const PostureTrainingSet set = posture_training_set(20, 5);
    const auto examples = collect_posture_examples(set.frames, set.labels, Seat::Middle);
    CHECK(examples.size() == 60);
    const auto [model, report] = train_posture_model(examples, 40, 1e-2, 3, 64);
    CHECK(report.losses.size() == 40);
    CHECK(report.final_loss < report.initial_loss);
    CHECK(report.accuracy >= 0.0);
    CHECK(model.finite());
  }
}
