#pragma once
// Brute-force reference implementations used only by the tests. They are
// deliberately naive (power-set scans, plain loops) so they share no code
// paths with the library.

#include "cellwlan/rng.hpp"
#include "cellwlan/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using cellwlan::CellMask;
using cellwlan::ContentionGraph;

inline bool independent(const ContentionGraph& g, CellMask m)
{
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (((m >> i) & 1U) && ((m >> j) & 1U) && g.adjacent(i, j))
        return false;
  return true;
}

inline std::vector<std::size_t> bits(CellMask m)
{
  std::vector<std::size_t> v;
  for (std::size_t i = 0; i < 64; ++i)
    if ((m >> i) & 1U)
      v.push_back(i);
  return v;
}

// All independent sets, ordered lexicographically by sorted member list.
inline std::vector<CellMask> independent_sets(const ContentionGraph& g)
{
  std::vector<CellMask> out;
  for (CellMask m = 0; m < (CellMask{1} << g.size()); ++m)
    if (independent(g, m))
      out.push_back(m);
  std::sort(out.begin(), out.end(), [](CellMask a, CellMask b) { return bits(a) < bits(b); });
  return out;
}

struct Mis
{
  std::size_t alpha = 0;
  std::uint64_t eta = 0;
  std::vector<std::uint64_t> eta_i;
};

inline Mis maximum_independent_sets(const ContentionGraph& g)
{
  Mis r;
  r.eta_i.assign(g.size(), 0);
  for (CellMask m : independent_sets(g))
  {
    const auto k = bits(m).size();
    if (k > r.alpha)
    {
      r.alpha = k;
      r.eta = 0;
      std::fill(r.eta_i.begin(), r.eta_i.end(), 0);
    }
    if (k == r.alpha)
    {
      ++r.eta;
      for (auto i : bits(m))
        ++r.eta_i[i];
    }
  }
  return r;
}

inline ContentionGraph random_graph(cellwlan::SplitMix64& rng, std::size_t n, double p)
{
  ContentionGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p)
        g.add_edge(i, j);
  return g;
}

inline bool blocked(const ContentionGraph& g, CellMask a, std::size_t i)
{
  for (auto j : bits(a))
    if (g.adjacent(i, j))
      return true;
  return false;
}

// Unnormalized product form, then normalized.
inline std::vector<double> product_form(const std::vector<CellMask>& states,
                                        const std::vector<double>& rho)
{
  std::vector<double> w;
  double z = 0.0;
  for (CellMask m : states)
  {
    double p = 1.0;
    for (auto i : bits(m))
      p *= rho[i];
    w.push_back(p);
    z += p;
  }
  for (auto& v : w)
    v /= z;
  return w;
}

// Attempt-weighted collision probability of cell i, straight from the
// definition: average over backoff states of 1 - P(no other attempt).
inline double collision(const ContentionGraph& g, const std::vector<CellMask>& states, const std::vector<double>& pi,
                        const std::vector<double>& beta, const std::vector<int>& n, std::size_t i)
{
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k)
  {
    const CellMask a = states[k];
    if (((a >> i) & 1U) || blocked(g, a, i))
      continue;
    double quiet = std::pow(1.0 - beta[i], n[i] - 1);
    for (std::size_t j = 0; j < g.size(); ++j)
      if (j != i && g.adjacent(i, j) && !((a >> j) & 1U) && !blocked(g, a, j))
        quiet *= std::pow(1.0 - beta[j], n[j]);
    num += pi[k] * (1.0 - quiet);
    den += pi[k];
  }
  return num / den;
}

// Root of f on [lo, hi] by bisection, f(lo) and f(hi) of opposite sign.
template <class F>
double bisect(F f, double lo, double hi)
{
  double flo = f(lo);
  for (int it = 0; it < 200; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm <= 0) == (flo <= 0))
    {
      lo = mid;
      flo = fm;
    }
    else
    {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace oracle
