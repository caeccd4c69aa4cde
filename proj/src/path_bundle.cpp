#include "mrtkit/path_bundle.hpp"

#include <cmath>
#include <numeric>

namespace mrtkit {

void MarkLaw::validate() const {
    if (kind == Kind::Discrete) {
        if (values.empty() || values.size() != probs.size())
            throw std::invalid_argument("MarkLaw: discrete law needs matching values/probs");
        double total = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw std::invalid_argument("MarkLaw: negative probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("MarkLaw: probabilities must sum to 1");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("MarkLaw: non-finite mark value");
    } else {
        if (!(sd >= 0.0) || !std::isfinite(mean) || !std::isfinite(sd))
            throw std::invalid_argument("MarkLaw: Gaussian law needs finite mean and sd >= 0");
    }
}

double MarkLaw::moment(int i) const {
    if (i < 0) throw std::invalid_argument("MarkLaw: negative moment order");
    if (i == 0) return 1.0;
    if (kind == Kind::Discrete) {
        double m = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k)
            m += probs[k] * std::pow(values[k], i);
        return m;
    }
    // Gaussian raw moments: m_i = mean*m_{i-1} + (i-1)*sd^2*m_{i-2}
    double prev = 1.0, cur = mean;
    for (int k = 2; k <= i; ++k) {
        const double next = mean * cur + (k - 1) * sd * sd * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

void LevySpec::validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("LevySpec: sigma must be >= 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("LevySpec: lambda must be >= 0");
    if (!std::isfinite(drift)) throw std::invalid_argument("LevySpec: non-finite drift");
    marks.validate();
}

}  // namespace mrtkit
