#ifndef GRADFLOW_DECAY_HPP
#define GRADFLOW_DECAY_HPP

#include <functional>
#include <string>
#include <vector>

namespace gradflow {

/// Time profile h(t) of a non-autonomous perturbation.
class DecayProfile {
 public:
  enum class Form { PowerLaw, Custom };

  /// h(t) = (1 + t)^(-alpha), alpha > 0.
  static DecayProfile power_law(double alpha);
  /// User-supplied h and h'. `log_slope` (h'/h) is optional; when empty it is
  /// computed as h'(t) / h(t).
  static DecayProfile custom(std::string name, std::function<double(double)> value,
                             std::function<double(double)> derivative,
                             std::function<double(double)> log_slope = {});
  /// Positive samples (t_i, h_i), interpolated linearly in (ln(1+t), ln h)
  /// and extrapolated with the outermost segment slopes.
  static DecayProfile sampled(std::vector<double> times, std::vector<double> values);

  Form form() const { return form_; }
  const std::string& name() const { return name_; }
  double alpha() const { return alpha_; }

  double value(double t) const { return value_(t); }
  double derivative(double t) const { return derivative_(t); }
  double log_slope(double t) const;

 private:
  Form form_ = Form::Custom;
  std::string name_;
  double alpha_ = 0.0;
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
  std::function<double(double)> log_slope_;
};

}  // namespace gradflow

#endif
