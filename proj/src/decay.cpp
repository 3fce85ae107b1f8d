#include "gradflow/decay.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "gradflow/error.hpp"

namespace gradflow {

DecayProfile DecayProfile::power_law(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "power_law requires alpha > 0");
  DecayProfile h;
  h.form_ = Form::PowerLaw;
  h.name_ = "power_law";
  h.alpha_ = alpha;
  h.value_ = [alpha](double t) { return std::pow(1.0 + t, -alpha); };
  h.derivative_ = [alpha](double t) { return -alpha * std::pow(1.0 + t, -alpha - 1.0); };
  h.log_slope_ = [alpha](double t) { return -alpha / (1.0 + t); };
  return h;
}

DecayProfile DecayProfile::custom(std::string name, std::function<double(double)> value,
                                  std::function<double(double)> derivative,
                                  std::function<double(double)> log_slope) {
  if (!value || !derivative) throw Error(ErrorCode::InvalidArgument, "custom decay profile needs h and h'");
  DecayProfile h;
  h.form_ = Form::Custom;
  h.name_ = std::move(name);
  h.value_ = std::move(value);
  h.derivative_ = std::move(derivative);
  h.log_slope_ = std::move(log_slope);
  return h;
}

DecayProfile DecayProfile::sampled(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "sampled decay profile needs >= 2 matching samples");
  for (size_t i = 0; i < times.size(); ++i) {
    if (!(values[i] > 0.0) || times[i] < 0.0)
      throw Error(ErrorCode::InvalidArgument, "sampled decay profile needs t >= 0 and h > 0");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "sampled decay profile times must increase");
  }
  struct Table {
    std::vector<double> x, y;  // ln(1+t), ln h
    // Segment index and slope dy/dx for argument x.
    std::pair<size_t, double> locate(double xq) const {
      auto it = std::upper_bound(x.begin(), x.end(), xq);
      size_t i = it == x.begin() ? 0 : static_cast<size_t>(it - x.begin()) - 1;
      i = std::min(i, x.size() - 2);
      return {i, (y[i + 1] - y[i]) / (x[i + 1] - x[i])};
    }
    double log_h(double t) const {
      const double xq = std::log1p(t);
      auto [i, s] = locate(xq);
      return y[i] + s * (xq - x[i]);
    }
  };
  auto table = std::make_shared<Table>();
  for (size_t i = 0; i < times.size(); ++i) {
    table->x.push_back(std::log1p(times[i]));
    table->y.push_back(std::log(values[i]));
  }
  auto value = [table](double t) { return std::exp(table->log_h(t)); };
  auto slope = [table](double t) { return table->locate(std::log1p(t)).second / (1.0 + t); };
  auto derivative = [value, slope](double t) { return value(t) * slope(t); };
  return custom("sampled", value, derivative, slope);
}

double DecayProfile::log_slope(double t) const {
  if (log_slope_) return log_slope_(t);
  return derivative_(t) / value_(t);
}

}  // namespace gradflow
