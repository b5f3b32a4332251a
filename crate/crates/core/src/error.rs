use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("characteristic {0} is too large (must be below 65536)")]
    PrimeTooLarge(u32),
    #[error("extension degree {degree} exceeds the configured bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },
    #[error("semilinear system is inconsistent over the current field")]
    Inconsistent,
    #[error("not integral at the place")]
    NotIntegral,
    #[error("denominator is not a unit at t = 0")]
    NonUnitDenominator,
    #[error("zero input")]
    ZeroInput,
    #[error("constant term is singular")]
    SingularConstantTerm,
    #[error("reduction at the place is singular")]
    SingularReduction,
    #[error("place must have degree one")]
    DegreeNotOne,
    #[error("no invertible solution up to splitting degree {0}")]
    SplittingDegreeExceeded(usize),
    #[error("determinant is not fixed by Frobenius")]
    DeterminantNotPhiFixed,
    #[error("witness is not fixed by Frobenius")]
    PhiFixednessViolated,
    #[error("centralizer of the constant term is not the diagonal torus")]
    CentralizerNotTorus,
    #[error("no rational descent found")]
    NoRationalDescent,
    #[error("group closure exceeded cap {0}")]
    CapExceeded(usize),
    #[error("polynomial is not irreducible")]
    NotIrreducible,
    #[error("polynomials are not pairwise distinct")]
    NotDistinct,
    #[error("constant term is not one")]
    ConstantTermNotOne,
    #[error("enumeration budget exceeded")]
    BudgetExceeded,
    #[error("no parameter tuple certified within budget")]
    BudgetExhausted,
    #[error("zeta is not a primitive root of unity of order q-1")]
    NotPrimitiveRoot,
    #[error("diagonal entries of g0 collide")]
    EigenvalueCollision,
    #[error("alpha must differ from 0 and 1")]
    BadAlpha,
    #[error("conjugator does not conjugate g0 to the companion matrix")]
    ConjugationFailed,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant failed: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
