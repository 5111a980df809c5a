//! Number-theoretic and special-function support.

pub mod beta;
pub mod binomial;
pub mod galois;
pub mod primes;
pub mod sidon;

pub use beta::reg_inc_beta;
pub use binomial::{choose, ln_choose, ArrivalModel};
pub use primes::{is_prime, prime_at_least, smallest_prime_greater};
pub use sidon::{build_sidon_set, verify_sidon, verify_sidon_graded, Construction, SidonSet};
