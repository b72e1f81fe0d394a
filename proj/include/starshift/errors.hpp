#pragma once

#include <stdexcept>
#include <string>

namespace starshift {

// Base class for everything thrown by this library.  Code that wants to
// distinguish failure modes catches the derived types; code that only wants
// to report catches this.
class SpectralError : public std::runtime_error {
public:
    explicit SpectralError(const std::string& what) : std::runtime_error(what) {}
};

#define STARSHIFT_DEFINE_ERROR(Name)                                          \
    class Name : public SpectralError {                                       \
    public:                                                                   \
        explicit Name(const std::string& what) : SpectralError(what) {}       \
    }

// Potential / input validation
STARSHIFT_DEFINE_ERROR(TailNotIntegrable);   // potential tail fails the integrability test
STARSHIFT_DEFINE_ERROR(MomentRequired);      // operation needs a finite first (or second) moment
STARSHIFT_DEFINE_ERROR(ValidationError);     // structurally valid input with out-of-range values
STARSHIFT_DEFINE_ERROR(SchemaError);         // malformed configuration document

// ODE / Jost layer
STARSHIFT_DEFINE_ERROR(StiffnessFailure);    // adaptive integrator underflowed its step size
STARSHIFT_DEFINE_ERROR(ZeroSpectralParam);   // zeta == 0 where a formula divides by it
STARSHIFT_DEFINE_ERROR(JostZero);            // Jost function vanishes where a quotient needs it

// Spectral layer
STARSHIFT_DEFINE_ERROR(EigenvalueHit);       // evaluation point collides with an eigenvalue
STARSHIFT_DEFINE_ERROR(GridTooCoarse);       // root scan cannot separate sign changes
STARSHIFT_DEFINE_ERROR(IllConditioned);      // classification sits on a decision boundary

// Scattering-phase layer
STARSHIFT_DEFINE_ERROR(AnchorTooSmall);      // high-energy anchor not close enough to the free phase
STARSHIFT_DEFINE_ERROR(RefinementLimit);     // phase unwrapping failed to settle
STARSHIFT_DEFINE_ERROR(TailTooFat);          // integral tail estimate exceeds the error budget
STARSHIFT_DEFINE_ERROR(WindowContainsZero);  // fit window touches the spectral origin

// Oracle / discretization layer
STARSHIFT_DEFINE_ERROR(NotConverged);        // Richardson pair disagrees beyond tolerance
STARSHIFT_DEFINE_ERROR(SingularShift);       // factorization hit an exact eigenvalue shift
STARSHIFT_DEFINE_ERROR(TrustRegionExceeded); // requested regime outside validated bounds

#undef STARSHIFT_DEFINE_ERROR

} // namespace starshift
