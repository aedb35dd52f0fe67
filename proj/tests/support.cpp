#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace eft {

using ef::HandLandmark;

ef::Body head_body(const std::string& id, const Vec3& ear_left, const Vec3& ear_right, const Vec3& nose,
                   const Vec3& pelvis) {
  ef::Body b;
  b.id = id;
  for (auto& j : b.joints) j.position = pelvis;
  b.joint(ef::JointId::EarLeft).position = ear_left;
  b.joint(ef::JointId::EarRight).position = ear_right;
  b.joint(ef::JointId::Nose).position = nose;
  return b;
}

ef::Body looking_body(const std::string& id, const Vec3& center, const Vec3& dir) {
  const Vec3 d = dir.normalized();
  Vec3 side = d.cross(Vec3::UnitY());
  if (side.norm() < 1e-6) side = d.cross(Vec3::UnitX());
  side.normalize();
  return head_body(id, center - 0.08 * side, center + 0.08 * side, center + 0.10 * d,
                   center - Vec3(0, 0.65, 0));
}

namespace {

struct HandFrame {
  Vec3 d, dn, lat;
};

HandFrame hand_frame(const Vec3& dir, const Vec3& down) {
  HandFrame f;
  f.d = dir.normalized();
  f.dn = (down - down.dot(f.d) * f.d).normalized();
  f.lat = f.dn.cross(f.d).normalized();
  return f;
}

void set_index(ef::HandLandmarks& h, const Vec3& w, const HandFrame& f, double bend) {
  const Vec3 u = std::cos(bend) * f.d + std::sin(bend) * f.dn;
  h[HandLandmark::IndexMcp] = w + kIndexSegments[0] * f.d;
  h[HandLandmark::IndexPip] = h[HandLandmark::IndexMcp] + kIndexSegments[1] * f.d;
  h[HandLandmark::IndexDip] = h[HandLandmark::IndexPip] + kIndexSegments[2] * u;
  h[HandLandmark::IndexTip] = h[HandLandmark::IndexDip] + kIndexSegments[3] * u;
}

// Knuckle, then down, back and down again: a loose fist.
void fold(ef::HandLandmarks& h, HandLandmark mcp, const Vec3& knuckle, const HandFrame& f) {
  const auto i = static_cast<std::size_t>(mcp);
  h.points[i] = knuckle;
  h.points[i + 1] = knuckle + 0.035 * f.dn;
  h.points[i + 2] = h.points[i + 1] - 0.025 * f.d;
  h.points[i + 3] = h.points[i + 2] - 0.015 * f.dn;
}

void straight(ef::HandLandmarks& h, HandLandmark first, const Vec3& base, const Vec3& dir) {
  const auto i = static_cast<std::size_t>(first);
  h.points[i] = base;
  h.points[i + 1] = base + 0.04 * dir;
  h.points[i + 2] = h.points[i + 1] + 0.025 * dir;
  h.points[i + 3] = h.points[i + 2] + 0.02 * dir;
}

ef::HandLandmarks base_hand(const std::string& body, const Vec3& wrist) {
  ef::HandLandmarks h;
  h.body_id = body;
  h.side = ef::HandSide::Right;
  h[HandLandmark::Wrist] = wrist;
  return h;
}

void fold_others(ef::HandLandmarks& h, const Vec3& w, const HandFrame& f) {
  fold(h, HandLandmark::MiddleMcp, w + 0.085 * f.d - 0.02 * f.lat, f);
  fold(h, HandLandmark::RingMcp, w + 0.08 * f.d - 0.04 * f.lat, f);
  fold(h, HandLandmark::PinkyMcp, w + 0.075 * f.d - 0.06 * f.lat, f);
  h[HandLandmark::ThumbCmc] = w + 0.03 * f.d + 0.03 * f.lat;
  h[HandLandmark::ThumbMcp] = h[HandLandmark::ThumbCmc] + 0.03 * f.dn;
  h[HandLandmark::ThumbIp] = h[HandLandmark::ThumbMcp] - 0.02 * f.d;
  h[HandLandmark::ThumbTip] = h[HandLandmark::ThumbIp] - 0.02 * f.lat;
}

}  // namespace

ef::HandLandmarks pointing_hand(const std::string& body, const Vec3& wrist, const Vec3& dir, const Vec3& down) {
  return bent_index_hand(body, wrist, dir, 0.0, down);
}

ef::HandLandmarks bent_index_hand(const std::string& body, const Vec3& wrist, const Vec3& dir, double bend,
                                  const Vec3& down) {
  const HandFrame f = hand_frame(dir, down);
  ef::HandLandmarks h = base_hand(body, wrist);
  set_index(h, wrist, f, bend);
  fold_others(h, wrist, f);
  return h;
}

ef::HandLandmarks open_palm(const std::string& body, const Vec3& wrist, const Vec3& dir, const Vec3& down) {
  const HandFrame f = hand_frame(dir, down);
  ef::HandLandmarks h = base_hand(body, wrist);
  set_index(h, wrist, f, 0.0);
  straight(h, HandLandmark::MiddleMcp, wrist + 0.085 * f.d - 0.02 * f.lat, f.d);
  straight(h, HandLandmark::RingMcp, wrist + 0.08 * f.d - 0.04 * f.lat, f.d);
  straight(h, HandLandmark::PinkyMcp, wrist + 0.075 * f.d - 0.06 * f.lat, f.d);
  const Vec3 thumb_dir = (f.d + f.lat).normalized();
  h[HandLandmark::ThumbCmc] = wrist + 0.03 * thumb_dir;
  straight(h, HandLandmark::ThumbMcp, h[HandLandmark::ThumbCmc] + 0.03 * thumb_dir, thumb_dir);
  return h;
}

ef::HandLandmarks translated(ef::HandLandmarks hand, const Vec3& offset) {
  for (auto& p : hand.points) p += offset;
  return hand;
}

ef::HandTrackWindow hand_window(const ef::HandLandmarks& hand, double t0, int n, double dt, const Vec3& velocity) {
  ef::HandTrackWindow w{hand.body_id, hand.side, {}};
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    w.samples.push_back({t, translated(hand, velocity * (i * dt))});
  }
  return w;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v(g(rng), g(rng), g(rng));
    if (v.norm() > 1e-6) return v.normalized();
  }
}

ef::Coned random_cone(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(ef::deg_to_rad(5.0), ef::deg_to_rad(40.0));
  std::uniform_real_distribution<double> range(0.5, 3.0);
  const Vec3 apex(u(rng), u(rng), u(rng));
  const Vec3 axis = random_unit(rng);
  const double half = angle(rng);
  return ef::Coned::make(apex, axis, half, range(rng));
}

ef::Aabbd random_box_near(const ef::Coned& cone, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> along(-0.2, 1.2);
  std::uniform_real_distribution<double> spread(0.0, 1.6);
  std::uniform_real_distribution<double> extra(0.0, 0.2);
  std::uniform_real_distribution<double> half(0.01, 0.3);
  const double s = along(rng) * cone.range;
  Vec3 perp = random_unit(rng);
  perp = (perp - perp.dot(cone.axis) * cone.axis).normalized();
  const double radial = spread(rng) * std::max(s, 0.05) * std::tan(cone.half_angle) + extra(rng);
  const Vec3 center = cone.apex + s * cone.axis + radial * perp;
  const Vec3 h(half(rng), half(rng), half(rng));
  return {center - h, center + h};
}

bool grid_hits_cone(const ef::Coned& cone, const ef::Aabbd& box, int n) {
  const Vec3 size = box.max - box.min;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 f(double(i) / (n - 1), double(j) / (n - 1), double(k) / (n - 1));
        if (ef::point_in_cone(cone, Vec3(box.min + size.cwiseProduct(f)))) return true;
      }
  return false;
}

double sampled_distance_to_cone(const ef::Coned& cone, const Vec3& p, int n) {
  Vec3 e1 = cone.axis.cross(Vec3::UnitX());
  if (e1.norm() < 0.1) e1 = cone.axis.cross(Vec3::UnitY());
  e1.normalize();
  const Vec3 e2 = cone.axis.cross(e1);
  const double reach = cone.range * std::tan(cone.half_angle);
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= n; ++a) {
    const double frac = double(a) / n;
    for (int b = 0; b < n; ++b) {
      const double phi = 2.0 * EIGEN_PI * b / n;
      const Vec3 radial = std::cos(phi) * e1 + std::sin(phi) * e2;
      const Vec3 side = cone.apex + frac * cone.range * cone.axis + frac * reach * radial;
      const Vec3 cap = cone.apex + cone.range * cone.axis + frac * reach * radial;
      best = std::min({best, (p - side).norm(), (p - cap).norm()});
    }
  }
  return best;
}

// ---- dominated discussion --------------------------------------------------

std::vector<DominatedTruth> dominated_scan(const std::vector<ef::SpeechInterval>& speech, const ef::FusionConfig& cfg,
                                           double step) {
  auto ticks = [step](double s) { return static_cast<long>(std::llround(s / step)); };
  std::vector<std::string> ids;
  for (const auto& s : speech) ids.push_back(s.speaker);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const std::size_t n = ids.size();
  if (n == 0) return {};

  const long threshold = ticks(cfg.dominated_threshold);
  const long gap = ticks(cfg.gap_tolerance);
  long horizon = 0;
  for (const auto& s : speech) horizon = std::max(horizon, ticks(s.end));
  horizon += gap + 2;

  // on[i][k]: speaker i speaks during [k, k+1) ticks.
  std::vector<std::vector<char>> on(n, std::vector<char>(static_cast<std::size_t>(horizon + 1), 0));
  for (const auto& s : speech) {
    const auto i = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), s.speaker) - ids.begin());
    for (long k = ticks(s.start); k < ticks(s.end); ++k) on[i][static_cast<std::size_t>(k)] = 1;
  }
  auto active = [&](std::size_t i, long k) { return k >= 0 && on[i][static_cast<std::size_t>(k)] != 0; };

  std::vector<long> run_start(n, 0), last_end(n, std::numeric_limits<long>::min() / 2);
  long holder = -1, turn_start = 0, acc = 0, crossing = 0;
  bool fired = false;
  long last_turn_end = std::numeric_limits<long>::min() / 2;
  std::vector<DominatedTruth> out;

  auto earliest = [&](long k, long exclude) {
    long best = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (long(i) == exclude || !active(i, k)) continue;
      if (best < 0 || run_start[i] < run_start[static_cast<std::size_t>(best)]) best = long(i);
    }
    return best;
  };
  auto grant = [&](long who, long start, long k) {
    holder = who;
    turn_start = start;
    acc = k - start;  // the new holder has spoken without a break since before `start`
    fired = false;
  };

  for (long k = 0; k <= horizon; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (active(i, k) && !active(i, k - 1)) run_start[i] = k;
      if (!active(i, k) && active(i, k - 1)) last_end[i] = k;
    }
    for (;;) {
      if (holder >= 0 && !fired && acc >= threshold) {
        fired = true;
        crossing = k - (acc - threshold);
        continue;
      }
      if (holder >= 0) {
        const auto h = static_cast<std::size_t>(holder);
        bool release = !active(h, k) && k - last_end[h] >= gap;
        for (std::size_t i = 0; i < n && !release; ++i)
          if (i != h && active(i, k) && k - std::max(run_start[i], turn_start) >= gap) release = true;
        if (release) {
          const long turn_end = active(h, k) ? k : last_end[h];
          if (fired) out.push_back({ids[h], turn_start * step, crossing * step, turn_end * step});
          last_turn_end = turn_end;
          const long old = holder;
          holder = -1;
          const long next = earliest(k, old);
          if (next >= 0) grant(next, std::max(run_start[static_cast<std::size_t>(next)], turn_end), k);
          continue;
        }
      } else {
        const long first = earliest(k, -1);
        if (first >= 0) {
          grant(first, std::max(run_start[static_cast<std::size_t>(first)], last_turn_end), k);
          continue;
        }
      }
      break;
    }
    if (holder >= 0 && active(static_cast<std::size_t>(holder), k)) ++acc;
  }
  return out;
}

std::vector<ef::SpeechInterval> random_speech(std::mt19937_64& rng, int speakers, double duration, double long_run) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  const long end = std::llround(duration * 100.0);
  const long long_ticks = std::llround(long_run * 100.0);
  std::vector<ef::SpeechInterval> out;
  for (int s = 0; s < speakers; ++s) {
    const std::string id = "S" + std::to_string(s + 1);
    long t = pick(0, 300);
    while (t < end) {
      const long talk = u(rng) < 0.3 ? pick(long_ticks * 7 / 10, long_ticks * 13 / 10) : pick(5, 250);
      const long stop = std::min(end, t + talk);
      if (stop > t) out.push_back({id, t / 100.0, stop / 100.0});
      t = stop + (u(rng) < 0.6 ? pick(10, 150) : pick(300, 1500));
    }
  }
  return out;
}

// ---- whole sessions --------------------------------------------------------

namespace {

template <typename T>
const T& choose(std::mt19937_64& rng, const std::vector<T>& options) {
  return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

struct ParticipantScript {
  ef::GazeTarget gaze;
  double gaze_until = 0.0;
  ef::PostureLabel posture = ef::PostureLabel::Neutral;
  double posture_until = 0.0;
  bool speaking = false;
  double speak_until = 0.0;
  bool pointing = false;
  std::string point_target;
  double point_until = 0.0;
};

}  // namespace

RandomSession random_session(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

  RandomSession s;
  s.cfg.dominated_threshold = choose(rng, std::vector<double>{2.0, 3.0, 5.0, 8.0});
  s.cfg.gap_tolerance = choose(rng, std::vector<double>{0.3, 0.5, 1.0, 2.0});
  s.cfg.jva_min_overlap = choose(rng, std::vector<double>{0.2, 0.5, 1.0});
  s.cfg.jva_min_participants = choose(rng, std::vector<int>{2, 2, 2, 3});
  s.cfg.disengage_dwell = choose(rng, std::vector<double>{0.5, 1.0, 2.0, 3.0});
  s.cfg.posture_smooth = choose(rng, std::vector<double>{0.1, 0.3, 0.5, 1.0});
  s.cfg.gaze_switch_frames = choose(rng, std::vector<int>{1, 2, 3, 4});

  const int count = u(rng) < 0.3 ? 2 : 3;
  std::vector<std::string> people;
  for (int i = 0; i < count; ++i) people.push_back("P" + std::to_string(i + 1));
  const bool with_posture = u(rng) < 0.85;
  const std::vector<std::string> objects{"O1", "O2"};

  auto random_target = [&](const std::string& self) {
    const double r = u(rng);
    if (r < 0.3) return ef::GazeTarget::none();
    if (r < 0.8) return ef::GazeTarget::object(choose(rng, objects));
    std::string other;
    do other = choose(rng, people);
    while (other == self);
    return ef::GazeTarget::participant(other);
  };
  auto random_label = [&]() { return static_cast<ef::PostureLabel>(std::uniform_int_distribution<int>(0, 2)(rng)); };

  std::map<std::string, ParticipantScript> scripts;
  const double duration = between(15.0, 40.0);
  double t = between(0.0, 3.0);
  const double t_begin = t;
  const double t_stop = t + duration;
  for (const auto& p : people) {
    scripts[p].gaze_until = t;
    scripts[p].posture_until = t;
    scripts[p].speak_until = t + between(0.0, 2.0);
    scripts[p].point_until = t + between(0.0, 3.0);
  }

  while (t < t_stop) {
    ef::FrameObservations f;
    f.t = t;
    for (const auto& p : people) {
      ParticipantScript& ps = scripts[p];
      if (t >= ps.gaze_until) {
        ps.gaze = random_target(p);
        ps.gaze_until = t + 0.05 + std::exponential_distribution<double>(1.0 / 1.2)(rng);
      }
      if (u(rng) < 0.98) f.gaze[p] = u(rng) < 0.88 ? ps.gaze : random_target(p);

      if (with_posture) {
        if (t >= ps.posture_until) {
          ps.posture = u(rng) < 0.5 ? ef::PostureLabel::LeanOut : random_label();
          ps.posture_until = t + 0.1 + std::exponential_distribution<double>(1.0 / 2.5)(rng);
        }
        if (u(rng) < 0.97) f.posture[p] = u(rng) < 0.85 ? ps.posture : random_label();
      }

      if (t >= ps.speak_until) {
        ps.speaking = !ps.speaking;
        const double run = ps.speaking ? (u(rng) < 0.35 ? between(0.8, 1.5) * s.cfg.dominated_threshold
                                                        : between(0.05, 1.5))
                                       : between(0.05, 2.5);
        ps.speak_until = t + run;
        if (u(rng) < 0.02) f.speech.push_back({p, !ps.speaking});  // overridden below: last entry wins
        f.speech.push_back({p, ps.speaking});
      } else if (u(rng) < 0.02) {
        f.speech.push_back({p, ps.speaking});
      }

      if (t >= ps.point_until) {
        ps.pointing = !ps.pointing;
        ps.point_target = choose(rng, objects);
        ps.point_until = t + (ps.pointing ? between(0.2, 2.0) : between(0.3, 3.0));
      }
      if (ps.pointing && u(rng) < 0.9) {
        // Hand windows never reach back before the first frame.
        ef::PointingObservation o{p, ef::HandSide::Right, std::max(t_begin, t - 0.2), {}};
        const double r = u(rng);
        const std::string other = ps.point_target == "O1" ? "O2" : "O1";
        if (r < 0.05) {
          // empty selection
        } else if (r < 0.1) {
          o.selected = {other};
        } else if (r < 0.4) {
          o.selected = {ps.point_target, other};
        } else {
          o.selected = {ps.point_target};
        }
        f.pointing.push_back(o);
        if (u(rng) < 0.1) f.pointing.push_back({p, ef::HandSide::Left, std::max(t_begin, t - 0.25), {other}});
      }
    }
    s.frames.push_back(std::move(f));
    t += between(0.7, 1.3) / 30.0;
  }
  return s;
}

std::vector<ef::EngagementEvent> run_engine(const RandomSession& session) {
  ef::FusionEngine engine(session.cfg);
  for (const auto& f : session.frames) engine.update(f);
  engine.finish();
  auto events = engine.events();
  ef::canonicalize(events);
  return events;
}

std::vector<ef::EngagementEvent> run_batch(const RandomSession& session) {
  return ef::detect_all(ef::build_timelines(session.frames, session.cfg), session.cfg);
}

std::string describe(const ef::EngagementEvent& e) {
  std::ostringstream os;
  os << ef::to_string(e.kind) << " [" << ef::format_number(e.t_start) << ", "
     << (e.t_end ? ef::format_number(*e.t_end) : std::string("open")) << "]";
  for (const auto& p : e.participants) os << ' ' << p;
  if (e.target) os << " -> " << *e.target;
  for (const auto& [k, v] : e.metadata) os << ' ' << k << '=' << v;
  return os.str();
}

// ---- MLP gradients ----------------------------------------------------------

GradientCheck gradient_check(std::uint64_t seed, int samples, double h) {
  using Model = ef::MlpModel<double>;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> hidden_dist(4, 24), batch_dist(1, 12), input_dist(3, 40);

  const Eigen::Index inputs = input_dist(rng), hidden = hidden_dist(rng), classes = 3;
  Model model = Model::uniform(inputs, hidden, classes, seed);
  model.b1 += Eigen::VectorXd::NullaryExpr(hidden, [&] { return 0.3 * g(rng); });
  std::vector<ef::LabeledExample<double>> batch(static_cast<std::size_t>(batch_dist(rng)));
  for (auto& ex : batch) {
    ex.x = Eigen::VectorXd::NullaryExpr(inputs, [&] { return g(rng); });
    ex.label = std::uniform_int_distribution<int>(0, int(classes) - 1)(rng);
  }

  ef::MlpGradients<double> grads;
  ef::mlp_loss<double>(model, batch, &grads);

  // Parameter k of the flattened (w1, b1, w2, b2) sequence.
  auto slot = [](Model& m, ef::MlpGradients<double>& gr, Eigen::Index k) -> std::pair<double*, double> {
    if (k < m.w1.size()) return {m.w1.data() + k, gr.w1.data()[k]};
    k -= m.w1.size();
    if (k < m.b1.size()) return {m.b1.data() + k, gr.b1[k]};
    k -= m.b1.size();
    if (k < m.w2.size()) return {m.w2.data() + k, gr.w2.data()[k]};
    k -= m.w2.size();
    return {m.b2.data() + k, gr.b2[k]};
  };
  const Eigen::Index total = model.w1.size() + model.b1.size() + model.w2.size() + model.b2.size();
  std::uniform_int_distribution<Eigen::Index> pick(0, total - 1);

  GradientCheck out;
  for (int s = 0; s < samples; ++s) {
    const Eigen::Index k = pick(rng);
    auto [param, analytic] = slot(model, grads, k);
    const double saved = *param;
    *param = saved + h;
    const double up = ef::mlp_loss<double>(model, batch);
    *param = saved - h;
    const double down = ef::mlp_loss<double>(model, batch);
    *param = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradientFloor});
    out.worst = std::max(out.worst, std::abs(analytic - numeric) / scale);
    ++out.checked;
  }
  return out;
}

TempDir::TempDir() {
  static std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  do {
    path_ = base / ("eft-" + std::to_string(rd()));
  } while (!std::filesystem::create_directory(path_));
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace eft
