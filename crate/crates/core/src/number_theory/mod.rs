//! Continued-fraction machinery for the rotation number α.

pub mod angle;
pub mod arith;
pub mod cf;
pub mod triplet;

pub use angle::{AngleEnclosure, AngleSpec, DecimalLiteral, QuadraticIrrational};
pub use cf::{
    convergents, convergents_from_quotients, expand_cf, largest_denominator_at_most,
    periodic_expansion, Convergent, PeriodicCf,
};
pub use triplet::{
    badly_approx_profile, limit_triplet, limit_triplets, triplet, triplets, verify_cf_identities,
    BadApproxProfile, Certified, IdentityReport, IdentityRow, ResidueTriplet, TripletSample,
    Verdict,
};
