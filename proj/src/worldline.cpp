#include "wlfield/worldline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <fmt/format.h>

#include "wlfield/quadrature.hpp"

namespace wlf {

using boost::math::interpolators::cubic_hermite;
using Hermite = cubic_hermite<std::vector<double>>;

std::string to_string(TransportRule rule) {
  return rule == TransportRule::FermiWalker ? "fermi-walker" : "parallel-lab";
}

TransportRule transport_rule_from_string(const std::string& s) {
  if (s == "fermi-walker") return TransportRule::FermiWalker;
  if (s == "parallel-lab") return TransportRule::ParallelLab;
  throw DomainError("unknown transport rule '" + s + "'");
}

Frame boost_frame(const FourVector& u) {
  Frame f;
  f.e[0] = u;
  for (int j = 1; j < 4; ++j) {
    FourVector e;
    e[0] = u[j];
    for (int i = 1; i < 4; ++i) e[i] = (i == j ? 1.0 : 0.0) + u[i] * u[j] / (1.0 + u[0]);
    f.e[j] = e;
  }
  return f;
}

double frame_orthonormality_error(const Frame& f) {
  double err = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double target = a == b ? (a == 0 ? -1.0 : 1.0) : 0.0;
      err = std::max(err, std::abs(minkowski(f.e[a], f.e[b]) - target));
    }
  return err;
}

namespace {

// Gram-Schmidt in the Minkowski metric with e0 pinned to u.
Frame orthonormalize(const FourVector& u, const Frame& in) {
  Frame f;
  f.e[0] = u;
  for (int j = 1; j < 4; ++j) {
    FourVector v = in.e[j];
    v += minkowski(v, u) * u;
    for (int i = 1; i < j; ++i) v -= minkowski(v, f.e[i]) * f.e[i];
    f.e[j] = (1.0 / std::sqrt(minkowski(v, v))) * v;
  }
  return f;
}

FourVector normalize_timelike(const FourVector& v) {
  const double n2 = -minkowski(v, v);
  if (!(n2 > 0.0)) throw DomainError("non-timelike tangent encountered");
  return (1.0 / std::sqrt(n2)) * v;
}

std::vector<double> finite_difference_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0) {
      d[k] = (y[1] - y[0]) / (x[1] - x[0]);
    } else if (k + 1 == n) {
      d[k] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    } else {
      const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
      d[k] = (-h1 / (h0 * (h0 + h1))) * y[k - 1] + ((h1 - h0) / (h0 * h1)) * y[k] +
             (h0 / (h1 * (h0 + h1))) * y[k + 1];
    }
  }
  return d;
}

}  // namespace

struct Worldline::Table {
  CurveSamples samples;
  std::vector<Hermite> event;
  std::vector<Hermite> velocity;
  double max_gap = 0.0;
  std::vector<Frame> fw_frames;

  FourVector event_at(double s) const {
    return {event[0](s), event[1](s), event[2](s), event[3](s)};
  }
  FourVector velocity_at(double s) const {
    return {velocity[0](s), velocity[1](s), velocity[2](s), velocity[3](s)};
  }
  FourVector velocity_prime(double s) const {
    return {velocity[0].prime(s), velocity[1].prime(s), velocity[2].prime(s), velocity[3].prime(s)};
  }
};

CurveSamples read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open worldline CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty worldline CSV '" + path + "'");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(std::remove_if(cell.begin(), cell.end(), ::isspace), cell.end());
      header.push_back(cell);
    }
  }
  const std::vector<std::string> expected{"tau", "t", "x", "y", "z", "ut", "ux", "uy", "uz"};
  if (header != expected)
    throw ConfigError("worldline CSV header must be tau,t,x,y,z,ut,ux,uy,uz");
  CurveSamples s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::array<double, 9> v{};
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= 9) throw ConfigError("worldline CSV: too many columns");
      try {
        v[k++] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError("worldline CSV: bad number '" + cell + "'");
      }
    }
    if (k != 9) throw ConfigError("worldline CSV: expected 9 columns");
    s.param.push_back(v[0]);
    s.events.emplace_back(v[1], v[2], v[3], v[4]);
    s.velocities.emplace_back(v[5], v[6], v[7], v[8]);
  }
  return s;
}

void write_curve_csv(const std::string& path, const CurveSamples& s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "tau,t,x,y,z,ut,ux,uy,uz\n";
  for (std::size_t k = 0; k < s.param.size(); ++k) {
    out << fmt::format("{:.17g}", s.param[k]);
    for (double v : s.events[k].c) out << fmt::format(",{:.17g}", v);
    for (double v : s.velocities[k].c) out << fmt::format(",{:.17g}", v);
    out << '\n';
  }
}

Worldline Worldline::inertial(double rapidity, std::array<double, 3> direction, FourVector offset,
                              Parametrization param) {
  const double nn = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                              direction[2] * direction[2]);
  if (!(nn > 0.0) || !std::isfinite(rapidity) || !is_finite(offset))
    throw DomainError("inertial worldline: need finite rapidity and nonzero direction");
  Worldline w;
  w.kind_ = Kind::Inertial;
  w.param_ = param;
  w.eta_ = rapidity;
  for (int i = 0; i < 3; ++i) w.n_[i] = direction[i] / nn;
  w.offset_ = offset;
  return w;
}

Worldline Worldline::rindler(double acceleration, Parametrization param) {
  if (!(acceleration > 0.0) || !std::isfinite(acceleration))
    throw DomainError("rindler worldline: acceleration must be positive");
  Worldline w;
  w.kind_ = Kind::Rindler;
  w.param_ = param;
  w.a_ = acceleration;
  return w;
}

Worldline Worldline::circular(double radius, double omega, Parametrization param) {
  if (!(radius > 0.0) || !std::isfinite(omega) || !(std::abs(radius * omega) < 1.0))
    throw DomainError("circular worldline: need R > 0 and R*|omega| < 1");
  Worldline w;
  w.kind_ = Kind::Circular;
  w.param_ = param;
  w.radius_ = radius;
  w.omega_ = omega;
  return w;
}

Worldline Worldline::tabulated(CurveSamples samples, Parametrization param) {
  const std::size_t n = samples.param.size();
  if (n < 4 || samples.events.size() != n || samples.velocities.size() != n)
    throw DomainError("tabulated worldline: need at least 4 consistent samples");
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (!(samples.param[k + 1] > samples.param[k]))
      throw DomainError("tabulated worldline: parameter must be strictly increasing");
  for (std::size_t k = 0; k < n; ++k) {
    const double g = minkowski(samples.velocities[k], samples.velocities[k]);
    if (!(g < 0.0)) throw DomainError(fmt::format("tabulated worldline: non-timelike sample at index {}", k));
    if (param == Parametrization::ProperTime) {
      if (std::abs(g + 1.0) > 1e-6)
        throw DomainError(fmt::format("tabulated worldline: sample {} not unit-normalized", k));
      samples.velocities[k] = normalize_timelike(samples.velocities[k]);
    }
  }

  auto table = std::make_shared<Table>();
  std::vector<double> gaps;
  for (std::size_t k = 0; k + 1 < n; ++k) gaps.push_back(samples.param[k + 1] - samples.param[k]);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  table->max_gap = 10.0 * gaps[gaps.size() / 2];

  for (int mu = 0; mu < 4; ++mu) {
    std::vector<double> x = samples.param, y(n), dy(n), v(n);
    for (std::size_t k = 0; k < n; ++k) {
      y[k] = samples.events[k][mu];
      dy[k] = samples.velocities[k][mu];
    }
    v = dy;
    auto dv = finite_difference_slopes(x, v);
    table->event.emplace_back(std::move(x), std::move(y), std::move(dy));
    table->velocity.emplace_back(std::vector<double>(samples.param), std::move(v), std::move(dv));
  }
  table->samples = std::move(samples);

  Worldline w;
  w.kind_ = Kind::Tabulated;
  w.param_ = param;
  w.lo_ = table->samples.param.front();
  w.hi_ = table->samples.param.back();
  w.table_ = table;

  if (param == Parametrization::ProperTime) {
    // Fermi-Walker frames at the sample points, RK4-transported from the first sample.
    const auto& p = table->samples.param;
    table->fw_frames.resize(n);
    table->fw_frames[0] = boost_frame(w.four_velocity(p[0]));
    for (std::size_t k = 0; k + 1 < n; ++k) {
      Frame f = table->fw_frames[k];
      const int sub = 4;
      const double h = (p[k + 1] - p[k]) / sub;
      double tau = p[k];
      auto rhs = [&](double s, const Frame& fr) {
        const FourVector u = w.velocity_impl(s, false), acc = w.acceleration_impl(s, false);
        Frame d;
        for (int j = 0; j < 4; ++j)
          d.e[j] = minkowski(acc, fr.e[j]) * u - minkowski(u, fr.e[j]) * acc;
        return d;
      };
      auto axpy = [](const Frame& x, double c, const Frame& y) {
        Frame r;
        for (int j = 0; j < 4; ++j) r.e[j] = x.e[j] + c * y.e[j];
        return r;
      };
      for (int s = 0; s < sub; ++s) {
        const Frame k1 = rhs(tau, f);
        const Frame k2 = rhs(tau + 0.5 * h, axpy(f, 0.5 * h, k1));
        const Frame k3 = rhs(tau + 0.5 * h, axpy(f, 0.5 * h, k2));
        const Frame k4 = rhs(tau + h, axpy(f, h, k3));
        for (int j = 0; j < 4; ++j)
          f.e[j] += (h / 6.0) * (k1.e[j] + 2.0 * k2.e[j] + 2.0 * k3.e[j] + k4.e[j]);
        tau += h;
      }
      table->fw_frames[k + 1] = orthonormalize(w.four_velocity(p[k + 1]), f);
    }
  }
  return w;
}

Worldline Worldline::from_csv(const std::string& path) { return tabulated(read_curve_csv(path)); }

bool Worldline::is_at_rest() const { return kind_ == Kind::Inertial && eta_ == 0.0; }

std::string Worldline::id() const {
  switch (kind_) {
    case Kind::Inertial:
      return fmt::format("inertial(eta={:g},n=({:g},{:g},{:g}),x0=({:g},{:g},{:g},{:g}))", eta_, n_[0],
                         n_[1], n_[2], offset_[0], offset_[1], offset_[2], offset_[3]);
    case Kind::Rindler:
      return fmt::format("rindler(a={:g})", a_);
    case Kind::Circular:
      return fmt::format("circular(R={:g},omega={:g})", radius_, omega_);
    case Kind::Tabulated:
      return fmt::format("tabulated(n={},range=[{:g},{:g}])", table_->samples.param.size(), lo_, hi_);
  }
  return "unknown";
}

Worldline Worldline::with_domain(double lo, double hi) const {
  if (!(hi > lo)) throw DomainError("worldline domain must be a nonempty interval");
  if (lo < lo_ || hi > hi_) throw DomainError("restricted domain exceeds the curve's domain");
  Worldline w = *this;
  w.lo_ = lo;
  w.hi_ = hi;
  return w;
}

void Worldline::check_domain(double s) const {
  if (!std::isfinite(s) || s < lo_ || s > hi_)
    throw DomainError(fmt::format("parameter {} outside worldline domain [{}, {}]", s, lo_, hi_));
}

void Worldline::check_proper(const char* what) const {
  if (param_ != Parametrization::ProperTime)
    throw DomainError(std::string(what) + " requires proper-time parametrization");
}

CurvePoint Worldline::evaluate(double s) const { return evaluate_impl(s, true); }

CurvePoint Worldline::evaluate_impl(double s, bool check_gaps) const {
  check_domain(s);
  const bool proper = param_ == Parametrization::ProperTime;
  switch (kind_) {
    case Kind::Inertial: {
      const double ch = std::cosh(eta_), sh = std::sinh(eta_);
      FourVector u(ch, sh * n_[0], sh * n_[1], sh * n_[2]);
      if (!proper) u = (1.0 / ch) * u;
      return {offset_ + s * u, u};
    }
    case Kind::Rindler: {
      if (proper) {
        const double ch = std::cosh(a_ * s), sh = std::sinh(a_ * s);
        return {{sh / a_, ch / a_, 0.0, 0.0}, {ch, sh, 0.0, 0.0}};
      }
      const double x = std::sqrt(1.0 / (a_ * a_) + s * s);
      return {{s, x, 0.0, 0.0}, {1.0, s / x, 0.0, 0.0}};
    }
    case Kind::Circular: {
      const double gamma = 1.0 / std::sqrt(1.0 - radius_ * radius_ * omega_ * omega_);
      const double dt = proper ? gamma : 1.0;
      const double t = dt * s;
      const double c = std::cos(omega_ * t), sn = std::sin(omega_ * t);
      return {{t, radius_ * c, radius_ * sn, 0.0},
              {dt, -dt * radius_ * omega_ * sn, dt * radius_ * omega_ * c, 0.0}};
    }
    case Kind::Tabulated: {
      const auto& p = table_->samples.param;
      auto it = std::upper_bound(p.begin(), p.end(), s);
      if (check_gaps && it != p.begin() && it != p.end() && s != *(it - 1) && (*it - *(it - 1)) > table_->max_gap)
        throw DomainError(fmt::format("parameter {} falls in a sampling gap of the tabulated curve", s));
      FourVector v = table_->velocity_at(s);
      if (proper) v = normalize_timelike(v);
      return {table_->event_at(s), v};
    }
  }
  throw Error("unreachable");
}

FourVector Worldline::four_velocity(double s) const { return velocity_impl(s, true); }

FourVector Worldline::velocity_impl(double s, bool check_gaps) const {
  const FourVector v = evaluate_impl(s, check_gaps).velocity;
  if (param_ == Parametrization::ProperTime && kind_ != Kind::Tabulated) return v;
  return normalize_timelike(v);
}

FourVector Worldline::acceleration(double tau) const { return acceleration_impl(tau, true); }

FourVector Worldline::acceleration_impl(double tau, bool check_gaps) const {
  check_proper("acceleration");
  check_domain(tau);
  switch (kind_) {
    case Kind::Inertial:
      return {};
    case Kind::Rindler:
      return {a_ * std::sinh(a_ * tau), a_ * std::cosh(a_ * tau), 0.0, 0.0};
    case Kind::Circular: {
      const double gamma = 1.0 / std::sqrt(1.0 - radius_ * radius_ * omega_ * omega_);
      const double t = gamma * tau;
      const double k = -gamma * gamma * radius_ * omega_ * omega_;
      return {0.0, k * std::cos(omega_ * t), k * std::sin(omega_ * t), 0.0};
    }
    case Kind::Tabulated: {
      const FourVector u = velocity_impl(tau, check_gaps);
      FourVector acc = table_->velocity_prime(tau);
      acc += minkowski(acc, u) * u;
      return acc;
    }
  }
  throw Error("unreachable");
}

Frame Worldline::transported_frame(double tau) const {
  const auto& p = table_->samples.param;
  std::size_t k = std::upper_bound(p.begin(), p.end(), tau) - p.begin();
  k = k == 0 ? 0 : k - 1;
  if (k + 1 >= p.size()) k = p.size() - 1;
  Frame f = table_->fw_frames[k];
  if (tau == p[k]) return f;
  const int sub = 4;
  const double h = (tau - p[k]) / sub;
  double s = p[k];
  auto rhs = [&](double x, const Frame& fr) {
    const FourVector u = velocity_impl(x, false), acc = acceleration_impl(x, false);
    Frame d;
    for (int j = 0; j < 4; ++j) d.e[j] = minkowski(acc, fr.e[j]) * u - minkowski(u, fr.e[j]) * acc;
    return d;
  };
  auto axpy = [](const Frame& x, double c, const Frame& y) {
    Frame r;
    for (int j = 0; j < 4; ++j) r.e[j] = x.e[j] + c * y.e[j];
    return r;
  };
  for (int i = 0; i < sub; ++i) {
    const Frame k1 = rhs(s, f);
    const Frame k2 = rhs(s + 0.5 * h, axpy(f, 0.5 * h, k1));
    const Frame k3 = rhs(s + 0.5 * h, axpy(f, 0.5 * h, k2));
    const Frame k4 = rhs(s + h, axpy(f, h, k3));
    for (int j = 0; j < 4; ++j) f.e[j] += (h / 6.0) * (k1.e[j] + 2.0 * k2.e[j] + 2.0 * k3.e[j] + k4.e[j]);
    s += h;
  }
  return orthonormalize(four_velocity(tau), f);
}

Frame Worldline::tetrad(TransportRule rule, double tau) const {
  check_proper("tetrad");
  check_domain(tau);
  const FourVector u = four_velocity(tau);
  if (rule == TransportRule::ParallelLab || kind_ == Kind::Inertial || kind_ == Kind::Rindler)
    return boost_frame(u);
  if (kind_ == Kind::Circular) {
    // Boost frame rotated by the Thomas precession angle (1 - gamma) * omega * t.
    const double gamma = 1.0 / std::sqrt(1.0 - radius_ * radius_ * omega_ * omega_);
    const double th = (1.0 - gamma) * omega_ * gamma * tau;
    const double c = std::cos(th), s = std::sin(th);
    const Frame b = boost_frame(u);
    Frame f = b;
    f.e[1] = c * b.e[1] + s * b.e[2];
    f.e[2] = -s * b.e[1] + c * b.e[2];
    return f;
  }
  return transported_frame(tau);
}

double Worldline::coordinate_to_proper(double s) const {
  if (param_ == Parametrization::ProperTime) return s;
  switch (kind_) {
    case Kind::Inertial:
      return s / std::cosh(eta_);
    case Kind::Rindler:
      return std::asinh(a_ * s) / a_;
    case Kind::Circular:
      return s * std::sqrt(1.0 - radius_ * radius_ * omega_ * omega_);
    case Kind::Tabulated:
      return proper_time(s);
  }
  throw Error("unreachable");
}

double Worldline::proper_time(double s) const {
  check_domain(s);
  const double ref = std::clamp(0.0, lo_, hi_);
  if (param_ == Parametrization::ProperTime) return s - ref;
  auto speed = [this](double x) {
    const FourVector v = evaluate(x).velocity;
    const double g = -minkowski(v, v);
    if (!(g > 0.0)) throw DomainError("non-timelike segment detected");
    return std::sqrt(g);
  };
  if (s == ref) return 0.0;
  const double lo = std::min(s, ref), hi = std::max(s, ref);
  double val = 0.0;
  if (kind_ == Kind::Tabulated) {
    // Integrate sample interval by sample interval so the Hermite knots are panel edges.
    const auto& p = table_->samples.param;
    std::vector<double> cuts{lo};
    for (double x : p)
      if (x > lo && x < hi) cuts.push_back(x);
    cuts.push_back(hi);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      val += quad::adaptive_real(speed, cuts[k], cuts[k + 1], {1e-15, 1e-14, 2000, 1});
  } else {
    val = quad::adaptive_real(speed, lo, hi);
  }
  return s >= ref ? val : -val;
}

Worldline Worldline::reparametrize_proper_time() const {
  if (param_ == Parametrization::ProperTime) return *this;
  Worldline w;
  if (kind_ == Kind::Tabulated) {
    const auto& src = table_->samples;
    CurveSamples out;
    for (std::size_t k = 0; k < src.param.size(); ++k) {
      out.param.push_back(proper_time(src.param[k]));
      out.events.push_back(src.events[k]);
      out.velocities.push_back(normalize_timelike(src.velocities[k]));
    }
    return tabulated(std::move(out), Parametrization::ProperTime);
  }
  w = *this;
  w.param_ = Parametrization::ProperTime;
  if (std::isfinite(lo_)) w.lo_ = coordinate_to_proper(lo_);
  if (std::isfinite(hi_)) w.hi_ = coordinate_to_proper(hi_);
  return w;
}

double Worldline::max_doppler(double lo, double hi) const {
  lo = std::max(lo, lo_);
  hi = std::min(hi, hi_);
  switch (kind_) {
    case Kind::Inertial:
      return std::exp(std::abs(eta_));
    case Kind::Rindler:
      if (param_ == Parametrization::ProperTime) return std::exp(a_ * std::max(std::abs(lo), std::abs(hi)));
      break;
    case Kind::Circular: {
      const double v = std::abs(radius_ * omega_);
      return (1.0 + v) / std::sqrt(1.0 - v * v);
    }
    case Kind::Tabulated:
      break;
  }
  double m = 0.0;
  const int n = 512;
  for (int k = 0; k <= n; ++k) {
    const FourVector u = four_velocity(lo + (hi - lo) * k / n);
    m = std::max(m, u[0] + spatial_norm(u));
  }
  return m * 1.05;
}

nlohmann::json Worldline::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case Kind::Inertial:
      j = {{"kind", "inertial"},
           {"rapidity", eta_},
           {"direction", n_},
           {"offset", offset_.c}};
      break;
    case Kind::Rindler:
      j = {{"kind", "rindler"}, {"acceleration", a_}};
      break;
    case Kind::Circular:
      j = {{"kind", "circular"}, {"radius", radius_}, {"omega", omega_}};
      break;
    case Kind::Tabulated: {
      const auto& s = table_->samples;
      nlohmann::json ev = nlohmann::json::array(), ve = nlohmann::json::array();
      for (std::size_t k = 0; k < s.param.size(); ++k) {
        ev.push_back(s.events[k].c);
        ve.push_back(s.velocities[k].c);
      }
      j = {{"kind", "tabulated"}, {"samples", {{"param", s.param}, {"events", ev}, {"velocities", ve}}}};
      break;
    }
  }
  j["parametrization"] = param_ == Parametrization::ProperTime ? "proper-time" : "coordinate-time";
  if (kind_ != Kind::Tabulated && (std::isfinite(lo_) || std::isfinite(hi_)))
    j["domain"] = {lo_, hi_};
  return j;
}

Worldline Worldline::from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    Parametrization param = Parametrization::ProperTime;
    if (j.contains("parametrization")) {
      const auto p = j.at("parametrization").get<std::string>();
      if (p == "coordinate-time")
        param = Parametrization::CoordinateTime;
      else if (p != "proper-time")
        throw ConfigError("unknown parametrization '" + p + "'");
    }
    Worldline w;
    if (kind == "inertial") {
      FourVector off;
      if (j.contains("offset")) off.c = j.at("offset").get<std::array<double, 4>>();
      w = inertial(j.value("rapidity", 0.0),
                   j.value("direction", std::array<double, 3>{1.0, 0.0, 0.0}), off, param);
    } else if (kind == "rindler") {
      w = rindler(j.at("acceleration").get<double>(), param);
    } else if (kind == "circular") {
      w = circular(j.at("radius").get<double>(), j.at("omega").get<double>(), param);
    } else if (kind == "tabulated") {
      if (j.contains("csv")) return from_csv(j.at("csv").get<std::string>());
      const auto& s = j.at("samples");
      CurveSamples cs;
      cs.param = s.at("param").get<std::vector<double>>();
      auto read_vectors = [](const nlohmann::json& arr, std::vector<FourVector>& out) {
        for (const auto& v : arr) {
          FourVector fv;
          fv.c = v.get<std::array<double, 4>>();
          out.push_back(fv);
        }
      };
      read_vectors(s.at("events"), cs.events);
      read_vectors(s.at("velocities"), cs.velocities);
      return tabulated(std::move(cs), param);
    } else {
      throw ConfigError("unknown worldline kind '" + kind + "'");
    }
    if (j.contains("domain")) {
      const auto d = j.at("domain").get<std::array<double, 2>>();
      w = w.with_domain(d[0], d[1]);
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("worldline JSON: ") + e.what());
  }
}

}  // namespace wlf
