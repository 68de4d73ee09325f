#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace esm {

class DiscreteScaling;

// Distribution handle. Subclasses supply closed forms where they have them; the defaults
// fall back to quadrature or root finding.
class Distribution {
public:
    virtual ~Distribution() = default;

    virtual double cdf(double x) const = 0;
    virtual double pdf(double x) const = 0;
    virtual double mean() const = 0;  // may be +inf

    virtual double sf(double x) const { return 1.0 - cdf(x); }
    virtual double quantile(double q) const;
    virtual double second_moment() const;
    // E[X; X > x]
    virtual double mean_above(double x) const;
    // H(s) = E[X; X <= s] / E[X], when available in closed form
    virtual std::optional<double> moment_cdf_closed(double s) const;
    virtual bool is_discrete() const { return false; }
};

using DistributionPtr = std::shared_ptr<const Distribution>;

// F(x) = 1 - (1 + x/(phi-1))^{-phi}; mean 1
class ParetoClaim final : public Distribution {
public:
    explicit ParetoClaim(double phi);
    double phi() const { return phi_; }
    double cdf(double x) const override;
    double sf(double x) const override;
    double pdf(double x) const override;
    double mean() const override { return 1.0; }
    double second_moment() const override;
    double quantile(double q) const override;
    double mean_above(double x) const override;
    std::optional<double> moment_cdf_closed(double s) const override;

private:
    double phi_;
};

// Integrated tail of ParetoClaim: 1 - (1 + x/(phi-1))^{-(phi-1)}
class ParetoIntegratedTail final : public Distribution {
public:
    explicit ParetoIntegratedTail(double phi);
    double phi() const { return phi_; }
    double cdf(double x) const override;
    double sf(double x) const override;
    double pdf(double x) const override;
    double mean() const override;
    double quantile(double q) const override;
    double mean_above(double x) const override;

private:
    double phi_;
};

class Exponential final : public Distribution {
public:
    explicit Exponential(double rate);
    double cdf(double x) const override;
    double sf(double x) const override;
    double pdf(double x) const override;
    double mean() const override { return 1.0 / rate_; }
    double second_moment() const override { return 2.0 / (rate_ * rate_); }
    double quantile(double q) const override;
    double mean_above(double x) const override;

private:
    double rate_;
};

// Finitely many atoms; cdf is right-continuous.
class DiscreteLaw final : public Distribution {
public:
    DiscreteLaw(std::vector<double> atoms, std::vector<double> probs);
    double cdf(double x) const override;
    double pdf(double) const override { return 0.0; }
    double mean() const override;
    double second_moment() const override;
    double quantile(double q) const override;
    double mean_above(double x) const override;
    std::optional<double> moment_cdf_closed(double s) const override;
    bool is_discrete() const override { return true; }
    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> atoms_, probs_;
};

// F_hat(x) = (1/mu_F) int_0^x (1 - F(t)) dt for a generic claim law.
class IntegratedTail final : public Distribution {
public:
    explicit IntegratedTail(DistributionPtr claim);
    double cdf(double x) const override;
    double pdf(double x) const override;
    double mean() const override;
    const Distribution& source() const { return *claim_; }

private:
    DistributionPtr claim_;
    double mu_;
};

// dH(s) = s dF(s) / mu_F
class MomentDistribution final : public Distribution {
public:
    explicit MomentDistribution(DistributionPtr source);
    double cdf(double s) const override;
    double pdf(double s) const override;
    double mean() const override;
    bool is_discrete() const override { return source_->is_discrete(); }
    const Distribution& source() const { return *source_; }

private:
    DistributionPtr source_;
    double mu_;
};

// Erlang(xi, xi): mean one, concentrating at 1 as xi grows.
class ErlangKernel final : public Distribution {
public:
    explicit ErlangKernel(int xi);
    int xi() const { return xi_; }
    double cdf(double s) const override;
    double sf(double s) const override;
    double pdf(double s) const override;
    double mean() const override { return 1.0; }
    double integrated_tail(double s) const;             // G_hat(s) = int_0^s (1 - G)
    double integrated_tail_complement(double s) const;  // int_s^inf (1 - G)
    double epsilon() const;                              // int_0^1 G
    double epsilon(double delta) const;                  // int_0^delta G

private:
    int xi_;
};

double pareto_integrated_tail(double x, double phi);
double erlang_cdf(double s, int xi);
double erlang_sf(double s, int xi);
double erlang_pdf(double s, int xi);
double erlang_integrated_tail(double s, int xi);
double erlang_integrated_tail_complement(double s, int xi);
double epsilon_m(int xi);
double epsilon_m_delta(int xi, double delta);

double moment_cdf(const Distribution& dist, double s);

// (Pi * G)(u) = sum_j pi_j G(u / s_j) over the stored atoms
double mellin_star_cdf(const DiscreteScaling& pi, int xi, double u);
// (F * G)(u) = int F(u/s) dG(s) for a continuous target
double mellin_star_cdf(const Distribution& target, int xi, double u);

}  // namespace esm
