#include "mrtkit/teugels.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mrtkit/regression.hpp"
#include "mrtkit/rng.hpp"
#include "mrtkit/stats.hpp"

namespace mrtkit {

namespace {

constexpr int kMaxPowerOrder = 6;

double stage_prob(const MarkedStage& stage, const std::vector<int>& subset) {
    double acc = 0.0;
    for (int idx : subset) acc += stage.mark_probs[idx];
    return acc;
}

}  // namespace

PowerJumpFamily power_jump_paths(const LevySpec& spec, const PathBundle& paths, int imax) {
    if (imax < 1 || imax > kMaxPowerOrder)
        throw std::invalid_argument("power_jump_paths: imax must lie in [1," +
                                    std::to_string(kMaxPowerOrder) + "]");
    if (!paths.has_jump_records() && spec.lambda > 0.0)
        throw std::invalid_argument("power_jump_paths: bundle has no jump records");
    spec.validate();

    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();

    PowerJumpFamily family;
    family.imax = imax;
    family.moments.resize(imax);
    family.moments[0] = spec.drift + spec.lambda * spec.marks.moment(1);
    for (int i = 2; i <= imax; ++i)
        family.moments[i - 1] = spec.lambda * spec.marks.moment(i);

    family.X.assign(imax, PathSeries(n, grid.points()));
    family.Y.assign(imax, PathSeries(n, grid.points()));

    const bool has_drift = paths.has_channel("drift");
    const bool has_diff = paths.has_channel("diff");

    for (int p = 0; p < n; ++p) {
        std::vector<int> snap;
        const JumpRecord* rec = nullptr;
        if (paths.has_jump_records()) {
            rec = &paths.jump_records()[p];
            snap = snap_jump_indices(rec->times, grid);
        }
        std::vector<double> power_sum(imax, 0.0);
        std::size_t j = 0;
        for (int k = 0; k <= grid.steps; ++k) {
            while (j < snap.size() && snap[j] == k) {
                double zp = 1.0;
                for (int i = 0; i < imax; ++i) {
                    zp *= rec->marks[j];
                    power_sum[i] += zp;
                }
                ++j;
            }
            const double t = grid.time(k);
            for (int i = 0; i < imax; ++i) {
                double x = power_sum[i];
                if (i == 0) {
                    if (has_drift) x += paths.channel("drift").at(p, k);
                    if (has_diff) x += paths.channel("diff").at(p, k);
                }
                family.X[i].at(p, k) = x;
                family.Y[i].at(p, k) = x - family.moments[i] * t;
            }
        }
    }
    return family;
}

Eigen::MatrixXd gram_matrix(const LevySpec& spec, int imax) {
    if (imax < 1 || imax > kMaxPowerOrder)
        throw std::invalid_argument("gram_matrix: imax must lie in [1," +
                                    std::to_string(kMaxPowerOrder) + "]");
    spec.validate();
    Eigen::MatrixXd gram(imax, imax);
    for (int i = 1; i <= imax; ++i)
        for (int j = 1; j <= imax; ++j) {
            double value = spec.lambda * spec.marks.moment(i + j);
            if (i == 1 && j == 1) value += spec.sigma * spec.sigma;
            gram(i - 1, j - 1) = value;
        }
    return gram;
}

OrthoCoeffs orthogonalize(const Eigen::MatrixXd& gram, double tol) {
    if (gram.rows() != gram.cols())
        throw std::invalid_argument("orthogonalize: matrix must be square");
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("orthogonalize: matrix must be symmetric");

    const int n = static_cast<int>(gram.rows());
    OrthoCoeffs out;
    out.a = Eigen::MatrixXd::Identity(n, n);
    out.diag = Eigen::VectorXd::Zero(n);
    out.degenerate.assign(n, false);

    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, i);
        for (int k = 0; k < i; ++k) {
            if (out.degenerate[k]) continue;
            const Eigen::VectorXd hk = out.a.row(k).transpose();
            const double proj = v.dot(gram * hk) / out.diag(k);
            v -= proj * hk;
        }
        v(i) = 1.0;  // keep the combination unitriangular
        const double norm2 = v.dot(gram * v);
        out.a.row(i) = v.transpose();
        out.diag(i) = norm2;
        if (norm2 < tol) out.degenerate[i] = true;
    }
    return out;
}

std::vector<PathSeries> ortho_family_paths(const OrthoCoeffs& coeffs,
                                           const PowerJumpFamily& family) {
    const int n_orders = static_cast<int>(coeffs.a.rows());
    if (n_orders > family.imax)
        throw std::invalid_argument("ortho_family_paths: coefficient rows exceed family orders");
    const int n = family.Y.front().n_paths();
    const int cols = family.Y.front().n_cols();

    std::vector<PathSeries> H(n_orders, PathSeries(n, cols));
    for (int i = 0; i < n_orders; ++i)
        for (int p = 0; p < n; ++p) {
            auto out = H[i].row(p);
            for (int j = 0; j <= i; ++j) {
                const double c = coeffs.a(i, j);
                if (c == 0.0) continue;
                auto y = family.Y[j].row(p);
                for (int k = 0; k < cols; ++k) out[k] += c * y[k];
            }
        }
    return H;
}

PrpResidualReport prp_residual(const std::vector<double>& target,
                               const std::vector<PathSeries>& H,
                               const std::vector<bool>& degenerate,
                               const PathBundle& paths, int degree) {
    if (H.empty()) throw std::invalid_argument("prp_residual: empty martingale family");
    if (degree < 0 || degree > 6)
        throw std::invalid_argument("prp_residual: degree must lie in [0,6]");
    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();
    if (static_cast<int>(target.size()) != n)
        throw std::invalid_argument("prp_residual: sample count mismatch");

    const bool has_w = paths.has_channel("W.0");
    const PathSeries* w = has_w ? &paths.channel("W.0") : nullptr;
    const PathSeries* jump = nullptr;
    if (paths.has_channel("Nbar")) jump = &paths.channel("Nbar");
    else if (paths.has_channel("compjump")) jump = &paths.channel("compjump");
    if (!has_w && !jump)
        throw std::invalid_argument("prp_residual: bundle has no state channel");

    const int basis_cols =
        has_w && jump ? tensor_basis_size(degree) : degree + 1;
    std::vector<int> live;
    for (std::size_t i = 0; i < H.size(); ++i)
        if (i >= degenerate.size() || !degenerate[i]) live.push_back(static_cast<int>(i));
    if (live.empty()) throw std::invalid_argument("prp_residual: all martingales degenerate");

    const int cols = basis_cols * static_cast<int>(live.size());
    DesignMatrix design = DesignMatrix::Zero(n, cols);
    std::vector<double> basis(basis_cols);

    for (int p = 0; p < n; ++p) {
        for (int m = 0; m < grid.steps; ++m) {
            if (has_w && jump)
                fill_tensor_monomials(w->at(p, m), jump->at(p, m), degree, basis.data());
            else if (jump)
                fill_monomials(jump->at(p, m), degree, basis.data());
            else
                fill_monomials(w->at(p, m), degree, basis.data());
            for (std::size_t li = 0; li < live.size(); ++li) {
                const PathSeries& h = H[live[li]];
                const double dh = h.at(p, m + 1) - h.at(p, m);
                if (dh == 0.0) continue;
                double* row = design.row(p).data() + li * basis_cols;
                for (int b = 0; b < basis_cols; ++b) row[b] += basis[b] * dh;
            }
        }
    }

    const double mean_t = stats::mean(target);
    Eigen::VectorXd y(n);
    for (int p = 0; p < n; ++p) y(p) = target[p] - mean_t;

    const Eigen::VectorXd beta = least_squares(design, y, 0);
    const Eigen::VectorXd resid = y - design * beta;

    PrpResidualReport report;
    report.columns = cols;
    const double denom = y.norm();
    report.rel_residual = denom > 0.0 ? resid.norm() / denom : resid.norm();
    return report;
}

double gamma_map(double z) {
    if (z == 0.0) throw std::domain_error("gamma_map: undefined at z = 0");
    if (z < 0.0) return std::expm1(z);
    return -std::expm1(-z);
}

void MarkedProcessSpec::validate() const {
    if (mark_values.empty()) throw std::invalid_argument("MarkedProcessSpec: no mark values");
    if (stages.empty()) throw std::invalid_argument("MarkedProcessSpec: no stages");
    std::set<double> uniq(mark_values.begin(), mark_values.end());
    if (uniq.size() != mark_values.size())
        throw std::invalid_argument("MarkedProcessSpec: duplicate mark values");
    for (const auto& stage : stages) {
        if (!(stage.rate > 0.0)) throw std::invalid_argument("MarkedProcessSpec: rates must be > 0");
        if (stage.mark_probs.size() != mark_values.size())
            throw std::invalid_argument("MarkedProcessSpec: stage probabilities mismatch");
        double total = 0.0;
        for (double p : stage.mark_probs) {
            if (p < 0.0) throw std::invalid_argument("MarkedProcessSpec: negative probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("MarkedProcessSpec: stage probabilities must sum to 1");
    }
}

PathBundle gen_marked(const MarkedProcessSpec& spec, const TimeGrid& grid, int n_paths,
                      std::uint64_t seed, const GenOptions& opt) {
    spec.validate();
    if (n_paths < 1) throw std::invalid_argument("gen_marked: n_paths must be >= 1");

    PathBundle bundle(grid, n_paths, seed);
    PathSeries& state = bundle.add_channel("x");
    auto& records = bundle.mutable_jump_records();
    records.resize(n_paths);

    for (int p = 0; p < n_paths; ++p) {
        PhiloxRng rng(seed, static_cast<std::uint32_t>(opt.first_path + p), 2000);
        auto& rec = records[p];
        double t = 0.0;
        for (const auto& stage : spec.stages) {
            t += rng.exponential(stage.rate);
            if (t > grid.horizon) break;
            if (!rec.times.empty() && t <= rec.times.back())
                t = std::nextafter(rec.times.back(), grid.horizon * 2.0);
            if (t > grid.horizon) break;
            const double u = rng.uniform();
            double acc = 0.0;
            double mark = spec.mark_values.back();
            for (std::size_t k = 0; k < spec.mark_values.size(); ++k) {
                acc += stage.mark_probs[k];
                if (u <= acc) {
                    mark = spec.mark_values[k];
                    break;
                }
            }
            rec.times.push_back(t);
            rec.marks.push_back(mark);
        }

        const std::vector<int> snap = snap_jump_indices(rec.times, grid);
        auto row = state.row(p);
        std::size_t j = 0;
        double current = 0.0;
        for (int k = 0; k <= grid.steps; ++k) {
            while (j < snap.size() && snap[j] == k) {
                current = rec.marks[j];
                ++j;
            }
            row[k] = current;
        }
    }
    return bundle;
}

CompensatorPaths compensator_marked(const MarkedProcessSpec& spec,
                                    const std::vector<int>& mark_subset,
                                    const PathBundle& paths) {
    spec.validate();
    if (mark_subset.empty())
        throw std::invalid_argument("compensator_marked: empty mark subset");
    for (int idx : mark_subset)
        if (idx < 0 || idx >= static_cast<int>(spec.mark_values.size()))
            throw std::invalid_argument("compensator_marked: mark index out of range");
    if (!paths.has_jump_records())
        throw std::invalid_argument("compensator_marked: bundle has no jump records");

    const TimeGrid& grid = paths.grid();
    const int n = paths.n_paths();
    const int k_max = static_cast<int>(spec.stages.size());

    std::set<double> subset_values;
    for (int idx : mark_subset) subset_values.insert(spec.mark_values[idx]);

    CompensatorPaths out;
    out.counts = PathSeries(n, grid.points());
    out.compensator = PathSeries(n, grid.points());
    out.q = PathSeries(n, grid.points());

    for (int p = 0; p < n; ++p) {
        const JumpRecord& rec = paths.jump_records()[p];
        auto c_row = out.counts.row(p);
        auto pt_row = out.compensator.row(p);
        auto q_row = out.q.row(p);

        for (int k = 0; k <= grid.steps; ++k) {
            const double t = grid.time(k);
            // completed stages by t
            int done = 0;
            while (done < static_cast<int>(rec.times.size()) && rec.times[done] <= t) ++done;
            done = std::min(done, k_max);

            double count = 0.0;
            double comp = 0.0;
            double prev_time = 0.0;
            for (int i = 0; i < done; ++i) {
                if (subset_values.count(rec.marks[i])) count += 1.0;
                comp += spec.stages[i].rate * stage_prob(spec.stages[i], mark_subset) *
                        (rec.times[i] - prev_time);
                prev_time = rec.times[i];
            }
            if (done < k_max) {
                comp += spec.stages[done].rate * stage_prob(spec.stages[done], mark_subset) *
                        (t - prev_time);
            }
            c_row[k] = count;
            pt_row[k] = comp;
            q_row[k] = count - comp;
        }
    }
    return out;
}

}  // namespace mrtkit
