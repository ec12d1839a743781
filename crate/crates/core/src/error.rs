use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("value is not divisible by p^{k}")]
    NotDivisible { k: u32 },
    #[error("precision exhausted: {what}")]
    PrecisionExhausted { what: String },
    #[error("precision {prec} too large for p = {p} (residues must fit in 62 bits)")]
    PrecisionTooLarge { p: u32, prec: u32 },
    #[error("element is not a unit: {0}")]
    NotUnit(String),
    #[error("unsupported substitution: {0}")]
    UnsupportedSubstitution(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("incompatible operands: {0}")]
    Mismatch(String),
    #[error("ghost vector is not integral at index {index}")]
    NonIntegral { index: usize },
    #[error("witt length {len} exceeds the supported maximum {max}")]
    LengthTooLarge { len: usize, max: usize },
    #[error("ring does not have characteristic p with prec 1")]
    NotReducedRing,
    #[error("delta-structures are not congruent mod p: {0}")]
    AssumptionViolated(String),
    #[error("negative exponent in {0}")]
    NegativeExponent(String),
    #[error("connection matrices do not commute")]
    NotCommuting,
    #[error("connection is not nilpotent within {bound} steps")]
    NotNilpotent { bound: usize },
    #[error("stratification is not of exponential type: {0}")]
    NotACrystal(String),
    #[error("t-exponent window too small: {0}")]
    WindowTooSmall(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("congruence fails at l = {l}: residual {detail}")]
    LemmaViolated { l: u32, detail: String },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("cosimplicial identity fails: {0}")]
    IdentityViolated(String),
    #[error("comparison diagram does not commute: {0}")]
    DiagramViolated(String),
    #[error("cohomology comparison failed: {0}")]
    ComparisonFailed(String),
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
