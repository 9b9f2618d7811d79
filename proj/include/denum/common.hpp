#ifndef DENUM_COMMON_HPP
#define DENUM_COMMON_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace denum {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One action vector per agent, indexed by agent id - 1.
using ActionProfile = std::vector<Vec>;

struct SolveConfig {
  double tol = 1e-9;      // projected-gradient norm tolerance for local solves
  int max_iters = 100000; // inner iteration cap
};

// ---------------------------------------------------------------------------
// Errors

struct DenumError : std::runtime_error {
  explicit DenumError(const std::string& msg) : std::runtime_error(msg) {}
};

#define DENUM_DEFINE_ERROR(Name)                                  \
  struct Name : DenumError {                                      \
    explicit Name(const std::string& msg) : DenumError(msg) {}    \
  }

DENUM_DEFINE_ERROR(DuplicateAgentId);
DENUM_DEFINE_ERROR(UnknownConstraintRef);
DENUM_DEFINE_ERROR(NonZeroInfluenceAtOrigin);
DENUM_DEFINE_ERROR(UnboundedLocalSet);
DENUM_DEFINE_ERROR(DimensionMismatch);
DENUM_DEFINE_ERROR(LocalSolveFailed);
DENUM_DEFINE_ERROR(GridTooLarge);
DENUM_DEFINE_ERROR(NotParticipant);
DENUM_DEFINE_ERROR(MissingInfluenceBound);
DENUM_DEFINE_ERROR(NonconcaveSubproblem);
DENUM_DEFINE_ERROR(ParseError);
DENUM_DEFINE_ERROR(SchemaError);
DENUM_DEFINE_ERROR(IoError);
DENUM_DEFINE_ERROR(MissingArtifact);
DENUM_DEFINE_ERROR(InvalidParams);
DENUM_DEFINE_ERROR(DegeneratePlacement);

#undef DENUM_DEFINE_ERROR

// Assumption 5 violation; carries the offending constraint id.
struct NullInfeasible : DenumError {
  int constraint_id;
  NullInfeasible(int n, const std::string& msg)
      : DenumError(msg), constraint_id(n) {}
};

struct NoConvergence : DenumError {
  explicit NoConvergence(const std::string& msg) : DenumError(msg) {}
};

// ---------------------------------------------------------------------------
// Pinned portable RNG (splitmix64). All randomness in the library flows
// through this generator so runs reproduce across platforms.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace denum

#endif  // DENUM_COMMON_HPP
