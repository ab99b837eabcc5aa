#include "cafde/codes.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cafde {

RegularEnsemble::RegularEnsemble(int dl_, int dr_) : dl(dl_), dr(dr_) {
  if (dl < 2) throw std::invalid_argument("variable degree dl must be >= 2");
  if (dr <= dl) throw std::invalid_argument("check degree dr must exceed dl");
}

Protograph Protograph::coupled(int dl, int dr, int L) {
  if (dl < 2) throw std::invalid_argument("variable degree dl must be >= 2");
  if (dr <= dl) throw std::invalid_argument("check degree dr must exceed dl");
  if (dr % dl != 0)
    throw std::invalid_argument("k = dr/dl must be an integer: dr not divisible by dl");
  if (dl % 2 == 0)
    throw std::invalid_argument("dhat = (dl-1)/2 must be an integer: dl must be odd");
  if (L < 1) throw std::invalid_argument("chain length L must be >= 1");

  Protograph p;
  p.dl_ = dl;
  p.dr_ = dr;
  p.L_ = L;
  p.k_ = dr / dl;
  p.dhat_ = (dl - 1) / 2;
  p.num_checks_ = L + 2 * p.dhat_;
  p.slot_check_.resize(static_cast<std::size_t>(L) * dl);
  for (int i = 0; i < L; ++i)
    for (int w = 0; w < dl; ++w) p.slot_check_[i * dl + w] = i + w;
  p.build_incidence();
  return p;
}

Protograph Protograph::uncoupled(int dl, int dr) {
  if (dl < 2) throw std::invalid_argument("variable degree dl must be >= 2");
  if (dr <= dl) throw std::invalid_argument("check degree dr must exceed dl");
  if (dr % dl != 0)
    throw std::invalid_argument("k = dr/dl must be an integer: dr not divisible by dl");

  Protograph p;
  p.dl_ = dl;
  p.dr_ = dr;
  p.L_ = 1;
  p.k_ = dr / dl;
  p.dhat_ = 0;
  p.num_checks_ = 1;
  p.slot_check_.assign(dl, 0);
  p.build_incidence();
  return p;
}

void Protograph::build_incidence() {
  incidence_.assign(num_checks_, {});
  for (int i = 0; i < L_; ++i)
    for (int w = 0; w < dl_; ++w) incidence_[slot_check_[i * dl_ + w]].emplace_back(i, w);
}

namespace {

std::vector<std::vector<int>> adjacency_from_edges(int n, int m,
                                                   const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> check_to_var(m);
  for (const auto& [v, c] : edges) check_to_var[c].push_back(v);
  for (auto& row : check_to_var) std::sort(row.begin(), row.end());
  (void)n;
  return check_to_var;
}

// Repairs duplicate (variable, check) incidences by swapping the check-side
// endpoint of one duplicate with a uniformly random edge from the same block.
// For the configuration model the block is the whole edge list (a socket
// swap); for permutation lifts it is one protograph edge's permutation, which
// keeps every block a bijection. Degree sequences are preserved exactly.
// Throws after max_passes.
void repair_double_edges(std::vector<std::pair<int, int>>& edges, Rng& rng, int max_passes,
                         std::size_t block) {
  const auto count_duplicates = [&](std::vector<std::size_t>& dup_sites) {
    dup_sites.clear();
    std::vector<std::pair<int, int>> sorted(edges);
    std::sort(sorted.begin(), sorted.end());
    std::size_t dups = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1]) ++dups;
    if (dups == 0) return dups;
    // locate one edge index per duplicated pair value
    std::vector<std::pair<int, int>> dup_vals;
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1] && (dup_vals.empty() || dup_vals.back() != sorted[i]))
        dup_vals.push_back(sorted[i]);
    for (const auto& val : dup_vals)
      for (std::size_t e = 0; e < edges.size(); ++e)
        if (edges[e] == val) {
          dup_sites.push_back(e);
          break;
        }
    return dups;
  };

  std::vector<std::size_t> sites;
  for (int pass = 0; pass < max_passes; ++pass) {
    if (count_duplicates(sites) == 0) return;
    for (std::size_t e : sites) {
      const std::size_t lo = (e / block) * block;
      const std::size_t other = lo + rng.below(static_cast<std::uint32_t>(block));
      std::swap(edges[e].second, edges[other].second);
    }
  }
  std::vector<std::size_t> dummy;
  if (count_duplicates(dummy) != 0)
    throw std::runtime_error("could not sample a simple graph within the repair budget");
}

}  // namespace

CodeInstance sample_code(const RegularEnsemble& ens, int n, std::uint64_t seed) {
  if (n < ens.dr) throw std::invalid_argument("block length too small for one check");
  if ((static_cast<long long>(n) * ens.dl) % ens.dr != 0)
    throw std::invalid_argument("n*dl must be divisible by dr");
  const int m = static_cast<int>(static_cast<long long>(n) * ens.dl / ens.dr);
  const int sockets = n * ens.dl;

  Rng rng(key_mix(seed, 0x636f6465));
  // variable socket s belongs to variable s / dl; check socket s to check s / dr
  std::vector<int> perm(sockets);
  for (int s = 0; s < sockets; ++s) perm[s] = s;
  for (int s = sockets - 1; s > 0; --s)
    std::swap(perm[s], perm[rng.below(static_cast<std::uint32_t>(s + 1))]);

  std::vector<std::pair<int, int>> edges(sockets);
  for (int s = 0; s < sockets; ++s) edges[s] = {perm[s] / ens.dl, s / ens.dr};
  repair_double_edges(edges, rng, 100, edges.size());

  CodeOrigin origin;
  origin.description =
      "(" + std::to_string(ens.dl) + "," + std::to_string(ens.dr) + ")-regular configuration model";
  origin.seed = seed;
  return CodeInstance(n, adjacency_from_edges(n, m, edges), std::move(origin));
}

CodeInstance sample_code(const Protograph& proto, int lift, std::uint64_t seed) {
  if (lift < 1) throw std::invalid_argument("lift size must be >= 1");
  const int n = proto.num_variables() * lift;
  const int m = proto.num_checks() * lift;

  Rng rng(key_mix(seed, 0x6c696674));
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * proto.dl());
  std::vector<int> pi(lift);
  for (int i = 0; i < proto.chain_length(); ++i) {
    for (int j = 0; j < proto.k(); ++j) {
      const int pv = i * proto.k() + j;
      for (int w = 0; w < proto.dl(); ++w) {
        const int pa = proto.check_of_slot(i, w);
        for (int c = 0; c < lift; ++c) pi[c] = c;
        for (int c = lift - 1; c > 0; --c)
          std::swap(pi[c], pi[rng.below(static_cast<std::uint32_t>(c + 1))]);
        for (int c = 0; c < lift; ++c) edges.emplace_back(pv * lift + c, pa * lift + pi[c]);
      }
    }
  }
  repair_double_edges(edges, rng, 100, static_cast<std::size_t>(lift));

  CodeOrigin origin;
  origin.description = "(" + std::to_string(proto.dl()) + "," + std::to_string(proto.dr()) + "," +
                       std::to_string(proto.chain_length()) + ")-protograph lift";
  origin.seed = seed;
  origin.lift = lift;
  return CodeInstance(n, adjacency_from_edges(n, m, edges), std::move(origin));
}

CodeInstance::CodeInstance(int n, std::vector<std::vector<int>> check_to_var, CodeOrigin origin)
    : n_(n), check_to_var_(std::move(check_to_var)), origin_(std::move(origin)) {
  const int m = static_cast<int>(check_to_var_.size());
  var_to_check_.assign(n_, {});
  BitMatrix h(m, n_);
  for (int c = 0; c < m; ++c) {
    for (int v : check_to_var_[c]) {
      if (v < 0 || v >= n_) throw std::invalid_argument("variable index out of range");
      var_to_check_[v].push_back(c);
      h.set(c, v, true);
    }
  }
  echelon_ = echelon_form(std::move(h));
  origin_.rank_deficiency = m - echelon_.rank;
}

bool CodeInstance::satisfies_checks(const BitVector& word) const {
  for (const auto& nbrs : check_to_var_) {
    int parity = 0;
    for (int v : nbrs) parity ^= word.get(v);
    if (parity) return false;
  }
  return true;
}

BitVector CodeInstance::sample_codeword(Rng& rng) const { return echelon_.sample_nullspace(rng); }

std::vector<BitVector> CodeInstance::generator_rows() const {
  std::vector<BitVector> rows;
  rows.reserve(dimension());
  for (int j = 0; j < dimension(); ++j) rows.push_back(echelon_.basis_vector(j));
  return rows;
}

void CodeInstance::serialize(std::ostream& os) const {
  os << n_ << ' ' << check_to_var_.size() << '\n';
  for (const auto& nbrs : check_to_var_) {
    for (std::size_t i = 0; i < nbrs.size(); ++i) os << (i ? " " : "") << nbrs[i];
    os << '\n';
  }
}

CodeInstance CodeInstance::parse(std::istream& is, CodeOrigin origin) {
  int n = 0, m = 0;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty code file");
  {
    std::istringstream hdr(line);
    if (!(hdr >> n >> m) || n <= 0 || m <= 0) throw std::runtime_error("bad code header line");
  }
  std::vector<std::vector<int>> check_to_var(m);
  for (int c = 0; c < m; ++c) {
    if (!std::getline(is, line)) throw std::runtime_error("truncated code file");
    std::istringstream row(line);
    int v;
    while (row >> v) check_to_var[c].push_back(v);
  }
  if (origin.description.empty()) origin.description = "parsed";
  return CodeInstance(n, std::move(check_to_var), std::move(origin));
}

}  // namespace cafde
