#include "steadystein/des.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>

#include "steadystein/rng.hpp"

namespace steadystein {

namespace {

struct RepOutput {
    double abs_total = 0, total2 = 0;
    double dev2 = 0, tplus = 0; // E|dQ - p t^+|^2 and E t^+ (scaled)
    std::vector<double> phase_mean; // raw E[X_i], unscaled
    std::map<long, std::vector<std::vector<long>>> ssc_counts;
    long ssc_samples = 0;
    std::vector<double> dev_mean;
    long long events = 0;
    bool flow_ok = true;
};

class DesRep {
public:
    DesRep(const PhaseType& pt, double lambda, long n, double alpha, const DesConfig& cfg,
           long rep)
        : pt_(pt), lambda_(lambda), n_(n), alpha_(alpha), cfg_(cfg),
          rng_(cfg.seed, static_cast<uint64_t>(rep) + 1) {
        d_ = pt.dim();
        z_.assign(static_cast<size_t>(d_), 0);
        qcount_.assign(static_cast<size_t>(d_), 0);
    }

    RepOutput run() {
        RepOutput out;
        out.phase_mean.assign(static_cast<size_t>(d_), 0.0);
        out.dev_mean.assign(static_cast<size_t>(d_), 0.0);
        const double t_end = cfg_.burn_in + cfg_.horizon;
        const double delta = 1.0 / std::sqrt(lambda_);
        double t = 0.0;
        double next_sample = cfg_.burn_in + cfg_.ssc_sample_spacing;
        long long arrivals = 0, departures = 0, abandons = 0;
        double acc_abs = 0, acc_t2 = 0, acc_dev2 = 0, acc_tp = 0;
        std::vector<double> acc_phase(static_cast<size_t>(d_), 0.0);
        std::vector<double> acc_dev(static_cast<size_t>(d_), 0.0);
        double measured = 0.0;

        while (t < t_end) {
            double svc_rate = 0.0;
            for (long i = 0; i < d_; ++i) svc_rate += pt_.nu(i) * static_cast<double>(z_[i]);
            const long qtot = static_cast<long>(queue_.size());
            const double total_rate = lambda_ + svc_rate + alpha_ * static_cast<double>(qtot);
            const double dt = rng_.exponential(total_rate);
            double t_next = t + dt;

            // time-weighted statistics over [t, t_next), clipped to the window
            const double w_lo = std::max(t, cfg_.burn_in);
            const double w_hi = std::min(t_next, t_end);
            if (w_hi > w_lo) {
                const double w = w_hi - w_lo;
                measured += w;
                const long total = in_system();
                const double tt = delta * static_cast<double>(total - n_);
                acc_abs += w * std::abs(tt);
                acc_t2 += w * tt * tt;
                const double tp = delta * static_cast<double>(qtot); // (e^T Xtilde)^+
                acc_tp += w * tp;
                double dev2 = 0.0;
                for (long i = 0; i < d_; ++i) {
                    const double xi = static_cast<double>(z_[i] + qcount_[i]);
                    acc_phase[static_cast<size_t>(i)] += w * xi;
                    const double dev = delta * static_cast<double>(qcount_[i]) - pt_.p(i) * tp;
                    acc_dev[static_cast<size_t>(i)] += w * dev;
                    dev2 += dev * dev;
                }
                acc_dev2 += w * dev2;
            }
            // queue-composition samples at fixed epochs inside (t, t_next]
            while (next_sample <= t_next && next_sample <= t_end) {
                auto& hist = out.ssc_counts[qtot];
                if (hist.empty())
                    hist.assign(static_cast<size_t>(d_),
                                std::vector<long>(static_cast<size_t>(qtot) + 1, 0));
                for (long i = 0; i < d_; ++i)
                    ++hist[static_cast<size_t>(i)][static_cast<size_t>(qcount_[i])];
                ++out.ssc_samples;
                next_sample += cfg_.ssc_sample_spacing;
            }
            t = t_next;
            if (t >= t_end) break;

            ++out.events;
            double u = rng_.uniform() * total_rate;
            if (u < lambda_) {
                ++arrivals;
                const long ph = draw_phase();
                if (in_service() < n_)
                    ++z_[static_cast<size_t>(ph)];
                else {
                    queue_.push_back(static_cast<uint8_t>(ph));
                    ++qcount_[static_cast<size_t>(ph)];
                }
                continue;
            }
            u -= lambda_;
            bool handled = false;
            for (long i = 0; i < d_ && !handled; ++i) {
                const double r = pt_.nu(i) * static_cast<double>(z_[i]);
                if (u < r) {
                    complete_phase(i, departures);
                    handled = true;
                } else {
                    u -= r;
                }
            }
            if (!handled) {
                // abandonment: uniformly random waiting customer
                if (qtot > 0) {
                    const size_t victim = static_cast<size_t>(rng_.below(static_cast<uint64_t>(qtot)));
                    const uint8_t ph = queue_[victim];
                    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(victim));
                    --qcount_[ph];
                    ++abandons;
                }
            }
        }

        out.flow_ok = (arrivals == departures + abandons + in_system());
        out.abs_total = acc_abs / measured;
        out.total2 = acc_t2 / measured;
        out.dev2 = acc_dev2 / measured;
        out.tplus = acc_tp / measured;
        for (long i = 0; i < d_; ++i) {
            out.phase_mean[static_cast<size_t>(i)] = acc_phase[static_cast<size_t>(i)] / measured;
            out.dev_mean[static_cast<size_t>(i)] = acc_dev[static_cast<size_t>(i)] / measured;
        }
        return out;
    }

private:
    long in_system() const {
        long s = static_cast<long>(queue_.size());
        for (long v : z_) s += v;
        return s;
    }
    long in_service() const {
        long s = 0;
        for (long v : z_) s += v;
        return s;
    }
    long draw_phase() {
        double u = rng_.uniform();
        for (long i = 0; i < d_ - 1; ++i) {
            if (u < pt_.p(i)) return i;
            u -= pt_.p(i);
        }
        return d_ - 1;
    }
    void complete_phase(long i, long long& departures) {
        double u = rng_.uniform();
        for (long j = 0; j < d_; ++j) {
            if (u < pt_.P(i, j)) {
                --z_[static_cast<size_t>(i)];
                ++z_[static_cast<size_t>(j)];
                return;
            }
            u -= pt_.P(i, j);
        }
        // departure; head of queue (FCFS) enters service
        --z_[static_cast<size_t>(i)];
        ++departures;
        if (!queue_.empty()) {
            const uint8_t ph = queue_.front();
            queue_.pop_front();
            --qcount_[ph];
            ++z_[ph];
        }
    }

    const PhaseType& pt_;
    double lambda_;
    long n_;
    double alpha_;
    const DesConfig& cfg_;
    CounterRng rng_;
    long d_ = 0;
    std::vector<long> z_;      // in service, by phase
    std::deque<uint8_t> queue_; // waiting customers in arrival order (assigned phase)
    std::vector<long> qcount_;
};

} // namespace

DesResult des_simulate(const PhaseType& pt, double lambda, long n, double alpha,
                       const DesConfig& cfg) {
    pt.validate();
    if (!(alpha > 0.0))
        throw std::invalid_argument("des_simulate: alpha > 0 required (stationarity)");
    if (!(lambda > 0.0) || n < 1 || cfg.replications < 2 || !(cfg.horizon > 0.0))
        throw std::invalid_argument("des_simulate: invalid configuration");
    const long d = pt.dim();

    std::vector<RepOutput> reps(static_cast<size_t>(cfg.replications));
    const int jobs = cfg.jobs > 0 ? cfg.jobs
                                  : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            long r;
            while ((r = next.fetch_add(1)) < cfg.replications)
                reps[static_cast<size_t>(r)] = DesRep(pt, lambda, n, alpha, cfg, r).run();
        });
    for (auto& th : pool) th.join();

    const PhaseTypeDerived der = phasetype_derive(pt);
    const double delta = 1.0 / std::sqrt(lambda);
    DesResult out;
    std::vector<double> abs_reps, m2_reps;
    double dev2_sum = 0.0, tp_sum = 0.0;
    std::vector<std::vector<double>> phase_reps(static_cast<size_t>(d));
    out.ssc.dim = d;
    out.ssc.dev_rep_means.assign(static_cast<size_t>(d), {});
    for (const RepOutput& r : reps) {
        out.events += r.events;
        out.flow_conserved = out.flow_conserved && r.flow_ok;
        abs_reps.push_back(r.abs_total);
        m2_reps.push_back(r.total2);
        dev2_sum += r.dev2;
        tp_sum += r.tplus;
        for (long i = 0; i < d; ++i) {
            phase_reps[static_cast<size_t>(i)].push_back(
                delta * (r.phase_mean[static_cast<size_t>(i)] -
                         der.gamma(i) * static_cast<double>(n)));
            out.ssc.dev_rep_means[static_cast<size_t>(i)].push_back(
                r.dev_mean[static_cast<size_t>(i)]);
        }
        out.ssc.total_samples += r.ssc_samples;
        for (const auto& [ell, hist] : r.ssc_counts) {
            auto& agg = out.ssc.by_queue_length[ell];
            if (agg.empty())
                agg.assign(static_cast<size_t>(d),
                           std::vector<long>(static_cast<size_t>(ell) + 1, 0));
            for (long i = 0; i < d; ++i)
                for (size_t q = 0; q < hist[static_cast<size_t>(i)].size(); ++q)
                    agg[static_cast<size_t>(i)][q] += hist[static_cast<size_t>(i)][q];
        }
    }
    out.ssc.dev2_mean = dev2_sum / static_cast<double>(cfg.replications);
    out.ssc.tplus_mean = tp_sum / static_cast<double>(cfg.replications);
    out.ssc.delta = delta;
    out.abs_scaled_total = SimEstimate::from_replications(abs_reps, cfg.burn_in, cfg.seed);
    out.scaled_total_m2 = SimEstimate::from_replications(m2_reps, cfg.burn_in, cfg.seed);
    for (long i = 0; i < d; ++i)
        out.phase_mean.push_back(
            SimEstimate::from_replications(phase_reps[static_cast<size_t>(i)], cfg.burn_in,
                                           cfg.seed));
    return out;
}

SscTestReport ssc_binomial_test(const SscSamples& ssc, const Eigen::VectorXd& p,
                                long min_total, long min_stratum, double level) {
    SscTestReport rep;
    rep.conclusive = ssc.total_samples >= min_total;
    for (const auto& [ell, hist] : ssc.by_queue_length) {
        if (ell < 1) continue; // empty-queue stratum carries no composition
        long stratum = 0;
        for (long c : hist[0]) stratum += c;
        if (stratum < min_stratum) continue;
        for (long i = 0; i < ssc.dim; ++i) {
            std::vector<double> obs(hist[static_cast<size_t>(i)].begin(),
                                    hist[static_cast<size_t>(i)].end());
            std::vector<double> expd(obs.size());
            bool degenerate = p(i) <= 0.0 || p(i) >= 1.0;
            for (size_t q = 0; q < obs.size(); ++q)
                expd[q] = static_cast<double>(stratum) *
                          binomial_pmf(static_cast<long>(q), ell, p(i));
            SscTestItem item;
            item.phase = i;
            item.queue_length = ell;
            item.samples = stratum;
            if (degenerate) {
                // e.g. p_i = 0: every sample must have q_i = 0 exactly
                const size_t fixed = p(i) <= 0.0 ? 0 : obs.size() - 1;
                item.p_value = (obs[fixed] == static_cast<double>(stratum)) ? 1.0 : 0.0;
            } else {
                item.p_value = chi_square_gof_pvalue(obs, expd);
            }
            if (item.p_value < level) rep.passed = false;
            rep.items.push_back(item);
        }
    }
    // per-coordinate mean deviation and its replication standard error
    for (long i = 0; i < ssc.dim; ++i) {
        const auto& v = ssc.dev_rep_means[static_cast<size_t>(i)];
        const SimEstimate e = SimEstimate::from_replications(v, 0.0, 0);
        rep.dev_mean.push_back(e.value);
        rep.dev_se.push_back(e.std_error);
    }
    if (ssc.tplus_mean > 0.0)
        rep.ssc_moment_constant = ssc.dev2_mean / (ssc.delta * ssc.tplus_mean);
    return rep;
}

} // namespace steadystein
