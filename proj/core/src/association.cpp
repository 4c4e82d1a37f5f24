#include "mpslam/association.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpslam {

double log_gamma(const Link& link, std::size_t i) {
  if (!link.has_rho) return 0.0;
  const double lr = link.log_lambda[i] + link.log_rho;
  return link.forcing ? lr : log_add(lr, 0.0);
}

namespace {

// Extrinsic pieces per particle: s = base + non-forcing gammas, v = forcing gamma.
void node_sums(const FeatureNode& node, std::vector<double>& s, std::vector<double>& v,
               std::vector<std::vector<double>>& g) {
  const std::size_t n = node.log_base.size();
  s = node.log_base;
  v.assign(n, 0.0);
  g.resize(node.links.size());
  for (std::size_t l = 0; l < node.links.size(); ++l) {
    const Link& link = node.links[l];
    g[l].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = log_gamma(link, i);
      g[l][i] = gi;
      if (link.forcing)
        v[i] = gi;
      else
        s[i] += gi;
    }
  }
}

double rel_change(double old_log, double new_log) {
  if (old_log == new_log) return 0.0;
  if (old_log == kNegInf || new_log == kNegInf) return 1.0;
  return std::abs(std::expm1(new_log - old_log)) / std::max(1.0, std::exp(new_log - old_log));
}

}  // namespace

double update_feature_messages(FeatureNode& node) {
  const std::size_t n = node.log_base.size();
  const std::size_t nl = node.links.size();
  std::vector<double> s = node.log_base, v(n, 0.0);
  // per link: gamma, and for active non-forcing links t/(1+t) and 1/(1+t) with t = lambda rho
  std::vector<std::vector<double>> g(nl), p(nl), q(nl);
  std::vector<char> fast(nl, 0);
  for (std::size_t l = 0; l < nl; ++l) {
    const Link& link = node.links[l];
    g[l].assign(n, 0.0);
    fast[l] = link.has_rho && link.log_rho > kNegInf;
    if (!link.has_rho) continue;
    if (link.forcing) {
      for (std::size_t i = 0; i < n; ++i) g[l][i] = v[i] = link.log_lambda[i] + link.log_rho;
      continue;
    }
    p[l].assign(n, 0.0);
    q[l].assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double lt = link.log_lambda[i] + link.log_rho;
      if (lt == kNegInf) continue;
      if (lt > 30.0) {
        const double e = std::exp(-lt);
        g[l][i] = lt + std::log1p(e);
        q[l][i] = e / (1.0 + e);
        p[l][i] = 1.0 / (1.0 + e);
      } else {
        const double t = std::exp(lt);
        g[l][i] = std::log1p(t);
        q[l][i] = 1.0 / (1.0 + t);
        p[l][i] = t / (1.0 + t);
      }
      s[i] += g[l][i];
    }
  }

  // scaled posterior mass per particle
  std::vector<double> w(n);
  double top = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = (s[i] == kNegInf || v[i] == kNegInf) ? kNegInf : s[i] + v[i];
    top = std::max(top, w[i]);
  }
  if (top > kNegInf)
    for (double& x : w) x = std::exp(x - top);

  double change = 0.0;
  std::vector<double> ext(n), num(n);
  for (std::size_t l = 0; l < nl; ++l) {
    Link& link = node.links[l];
    double log_new;
    if (top == kNegInf) {
      log_new = kNegInf;
    } else if (fast[l] && link.forcing) {
      double a = 0.0;
      for (std::size_t i = 0; i < n; ++i) a += w[i];
      log_new = std::log(a) + top - link.log_rho - node.log_mass0;
    } else if (fast[l]) {
      double a = 0.0, b = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        a += w[i] * p[l][i];
        b += w[i] * q[l][i];
      }
      const double lb = b > 0.0 ? std::log(b) + top : kNegInf;
      log_new = (a > 0.0 ? std::log(a) + top : kNegInf) - link.log_rho - log_add(lb, node.log_mass0);
    } else if (link.forcing) {
      for (std::size_t i = 0; i < n; ++i) num[i] = s[i] + link.log_lambda[i];
      log_new = log_sum_exp(num) - node.log_mass0;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        ext[i] = (s[i] == kNegInf || v[i] == kNegInf) ? kNegInf : s[i] - g[l][i] + v[i];
        num[i] = ext[i] + link.log_lambda[i];
      }
      log_new = log_sum_exp(num) - log_add(log_sum_exp(ext), node.log_mass0);
    }
    if (std::isnan(log_new)) log_new = kNegInf;
    change = std::max(change, rel_change(link.log_eps, log_new));
    link.log_eps = log_new;
  }
  return change;
}

void update_measurement_messages(FactorTable& table) {
  std::vector<std::vector<Link*>> by_meas(table.num_measurements);
  for (auto& node : table.nodes)
    for (auto& link : node.links) {
      if (link.measurement >= table.num_measurements) throw std::out_of_range("link measurement index");
      by_meas[link.measurement].push_back(&link);
    }
  std::vector<double> terms;
  for (auto& links : by_meas) {
    for (std::size_t f = 0; f < links.size(); ++f) {
      terms.assign(1, 0.0);
      for (std::size_t o = 0; o < links.size(); ++o)
        if (o != f) terms.push_back(links[o]->log_eps);
      links[f]->log_rho = -log_sum_exp(terms);
      links[f]->has_rho = true;
    }
  }
}

AssociationStatus associate(FactorTable& table, int max_iterations, double tol) {
  AssociationStatus st;
  for (int it = 0; it < max_iterations; ++it) {
    double change = 0.0;
    for (auto& node : table.nodes) change = std::max(change, update_feature_messages(node));
    update_measurement_messages(table);
    st.iterations = it + 1;
    st.max_change = change;
    if (it > 0 && change < tol) {
      st.converged = true;
      break;
    }
  }
  return st;
}

std::vector<double> posterior_log_weights(const FeatureNode& node) {
  std::vector<double> s, v;
  std::vector<std::vector<double>> g;
  node_sums(node, s, v, g);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = (s[i] == kNegInf || v[i] == kNegInf) ? kNegInf : s[i] + v[i];
  return s;
}

double posterior_existence(const FeatureNode& node) {
  const auto w = posterior_log_weights(node);
  const double b1 = log_sum_exp(w);
  const double b0 = node.log_mass0;
  if (b1 == kNegInf) return 0.0;
  if (b0 == kNegInf) return 1.0;
  return 1.0 / (1.0 + std::exp(b0 - b1));
}

std::vector<std::vector<double>> association_probabilities(const FactorTable& table) {
  std::vector<double> norm(table.num_measurements, 0.0);
  for (const auto& node : table.nodes)
    for (const auto& link : node.links) norm[link.measurement] = log_add(norm[link.measurement], link.log_eps);
  std::vector<std::vector<double>> out(table.nodes.size());
  for (std::size_t f = 0; f < table.nodes.size(); ++f)
    for (const auto& link : table.nodes[f].links) out[f].push_back(std::exp(link.log_eps - norm[link.measurement]));
  return out;
}

FactorTable build_table(const ScalarAssociationProblem& pr) {
  FactorTable t;
  t.num_measurements = pr.num_measurements;
  auto safe_log = [](double x) { return x > 0.0 ? std::log(x) : kNegInf; };
  for (const auto& f : pr.legacy) {
    if (f.ratio.size() != pr.num_measurements) throw std::invalid_argument("legacy ratio size");
    FeatureNode node;
    node.log_base = {safe_log(f.existence)};
    node.log_mass0 = safe_log(1.0 - f.existence);
    for (std::size_t l = 0; l < pr.num_measurements; ++l) {
      Link link;
      link.measurement = l;
      link.log_lambda = {safe_log(f.ratio[l])};
      node.links.push_back(link);
    }
    t.nodes.push_back(std::move(node));
  }
  if (!pr.fresh.empty() && pr.fresh.size() != pr.num_measurements) throw std::invalid_argument("fresh count");
  for (std::size_t m = 0; m < pr.fresh.size(); ++m) {
    const auto& f = pr.fresh[m];
    if (f.ratio.size() != m + 1) throw std::invalid_argument("fresh ratio size");
    FeatureNode node;
    node.log_base = {safe_log(f.weight)};
    node.log_mass0 = 0.0;
    for (std::size_t l = 0; l <= m; ++l) {
      Link link;
      link.measurement = l;
      link.forcing = (l == m);
      link.log_lambda = {safe_log(f.ratio[l])};
      node.links.push_back(link);
    }
    t.nodes.push_back(std::move(node));
  }
  return t;
}

ScalarAssociation associate(const ScalarAssociationProblem& pr, int max_iterations, double tol) {
  FactorTable t = build_table(pr);
  ScalarAssociation out;
  out.status = associate(t, max_iterations, tol);
  // final feature-side pass so eps reflect the converged rho
  for (auto& node : t.nodes) update_feature_messages(node);
  out.p.assign(pr.num_measurements, std::vector<double>(1 + t.nodes.size(), 0.0));
  const auto probs = association_probabilities(t);
  for (std::size_t f = 0; f < t.nodes.size(); ++f)
    for (std::size_t l = 0; l < t.nodes[f].links.size(); ++l)
      out.p[t.nodes[f].links[l].measurement][1 + f] = probs[f][l];
  for (auto& row : out.p) {
    double s = 0.0;
    for (std::size_t h = 1; h < row.size(); ++h) s += row[h];
    row[0] = 1.0 - s;
  }
  for (const auto& node : t.nodes) out.existence.push_back(posterior_existence(node));
  return out;
}

}  // namespace mpslam
