#include "wfn/service_models.hpp"

#include <cmath>
#include <sstream>

namespace wfn {

namespace {

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be finite and > 0");
}

} // namespace

ServiceModel::ServiceModel(Deterministic m) : v_(m) { require_positive(m.d, "service time d"); }

ServiceModel::ServiceModel(Exponential m) : v_(m) { require_positive(m.omega, "service rate omega"); }

ServiceModel::ServiceModel(Erlang m) : v_(m) {
    require_positive(m.omega, "service rate omega");
    if (m.q < 1 || m.q > 8) throw DomainError("Erlang shape must be in 1..8");
}

std::string ServiceModel::name() const {
    std::ostringstream os;
    if (auto* d = std::get_if<Deterministic>(&v_)) os << "Deterministic(d=" << d->d << ")";
    else if (auto* e = std::get_if<Exponential>(&v_)) os << "Exponential(omega=" << e->omega << ")";
    else {
        const auto& g = std::get<Erlang>(v_);
        os << "Erlang(q=" << g.q << ", omega=" << g.omega << ")";
    }
    return os.str();
}

int ServiceModel::shape() const {
    if (auto* e = std::get_if<Erlang>(&v_)) return e->q;
    if (std::holds_alternative<Exponential>(v_)) return 1;
    throw UnsupportedModel("deterministic service has no Erlang shape");
}

double ServiceModel::rate() const {
    if (auto* e = std::get_if<Erlang>(&v_)) return e->omega;
    if (auto* e = std::get_if<Exponential>(&v_)) return e->omega;
    throw UnsupportedModel("deterministic service has no rate");
}

double ServiceModel::det_value() const {
    if (auto* d = std::get_if<Deterministic>(&v_)) return d->d;
    throw UnsupportedModel("service time is not deterministic");
}

double ServiceModel::moment(int k) const {
    if (k < 0) throw DomainError("negative moment order");
    if (is_deterministic()) return std::pow(det_value(), k);
    const int q = shape();
    const double w = rate();
    // (k+q-1)!/((q-1)! w^k)
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= static_cast<double>(q + i) / w;
    return r;
}

cplx ServiceModel::lst(cplx s) const {
    if (is_deterministic()) return std::exp(-s * det_value());
    const double w = rate();
    if (s == cplx(-w, 0.0)) throw PoleError("service transform evaluated at its pole s = -omega");
    return std::pow(w / (w + s), shape());
}

cplx ServiceModel::shifted_moment_coeff(cplx a, int k) const {
    if (k < 0) throw DomainError("negative coefficient index");
    if (is_deterministic()) {
        const double d = det_value();
        return std::pow(d, k) * std::exp(-a * d) / factorial(k);
    }
    const int q = shape();
    const double w = rate();
    if (a == cplx(-w, 0.0)) throw PoleError("shifted moment at the service pole a = -omega");
    if (!(a.real() > -w)) throw DomainError("shifted moment needs Re(a) > -omega");
    return binomial(k + q - 1, k) * std::pow(w, q) / std::pow(w + a, k + q);
}

Jet ServiceModel::residual_lst_jet(cplx s0, std::size_t order) const {
    if (is_deterministic()) {
        // g(s) = d int_0^1 e^{-s d t} dt;  g_k = d (-d)^k / k! int_0^1 t^k e^{-s0 d t} dt
        const double d = det_value();
        Jet g(order);
        for (std::size_t k = 0; k <= order; ++k) {
            const int ki = static_cast<int>(k);
            g[k] = d * std::pow(-d, ki) / factorial(ki) * unit_power_exp_integral(ki, s0 * d);
        }
        return g;
    }
    // (1 - r^q)/s = sum_{j<q} r^j / (w + s), r = w/(w+s)
    const double w = rate();
    const int q = shape();
    const cplx pole(-w, 0.0);
    Jet acc(order);
    for (int j = 0; j < q; ++j) acc += std::pow(w, j) * jet_of_rational(pole, j + 1, s0, order);
    return acc;
}

// ---------------------------------------------------------------------------

QueueSpec::QueueSpec(double lambda, ServiceModel model, std::optional<ServiceModel> model0)
    : lambda_(lambda), model_(std::move(model)), model0_(std::move(model0)) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("arrival rate must be finite and > 0");
    if (model0_ && !model0_->is_deterministic() && !(*model0_ == model_))
        throw UnsupportedModel("setup service must equal the regular service or be deterministic");
}

Utilization utilization(const QueueSpec& spec) { return {spec.rho(), spec.rho0()}; }

void stability_check(const QueueSpec& spec) {
    if (!(spec.rho() < 1.0)) throw StabilityViolation(spec.rho());
}

} // namespace wfn
