//! Named filter-output-truncation policies.
//!
//! The five cases enumerate how the K-1 filter-tail symbols are split
//! between the front and the rear cut. With t = floor(K/2) the front holds
//! t tails and the rear K-1-t; each named case keeps or drops one tail on
//! each side:
//!
//! | case               | (i_F, i_R)        | K=6 example |
//! |--------------------|-------------------|-------------|
//! | use_it_all         | (0, 0)            | (0, 0)      |
//! | one_front_and_end  | (t-1, K-2-t)      | (2, 1)      |
//! | one_front          | (t-1, K-1-t)      | (2, 2)      |
//! | one_end            | (t,   K-2-t)      | (3, 1)      |
//! | same_length        | (t,   K-1-t)      | (3, 2)      |

use crate::error::FbmcError;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationCase {
    UseItAll,
    OneFrontAndEnd,
    OneFront,
    OneEnd,
    SameLength,
}

impl TruncationCase {
    pub const ALL: [TruncationCase; 5] = [
        TruncationCase::UseItAll,
        TruncationCase::OneFrontAndEnd,
        TruncationCase::OneFront,
        TruncationCase::OneEnd,
        TruncationCase::SameLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TruncationCase::UseItAll => "use_it_all",
            TruncationCase::OneFrontAndEnd => "one_front_and_end",
            TruncationCase::OneFront => "one_front",
            TruncationCase::OneEnd => "one_end",
            TruncationCase::SameLength => "same_length",
        }
    }
}

impl std::str::FromStr for TruncationCase {
    type Err = FbmcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "use_it_all" => Ok(TruncationCase::UseItAll),
            "one_front_and_end" => Ok(TruncationCase::OneFrontAndEnd),
            "one_front" => Ok(TruncationCase::OneFront),
            "one_end" => Ok(TruncationCase::OneEnd),
            "same_length" => Ok(TruncationCase::SameLength),
            other => Err(FbmcError::UnknownCase(other.to_string())),
        }
    }
}

/// Map a named case to its (i_F, i_R) pair for the given overlapping factor.
pub fn truncation_case(overlap: usize, case: TruncationCase) -> Result<(usize, usize)> {
    if overlap < 2 {
        return Err(FbmcError::InvalidConfig(format!(
            "overlap must be >= 2, got {overlap}"
        )));
    }
    let t = overlap / 2;
    let pair = match case {
        TruncationCase::UseItAll => Some((0, 0)),
        TruncationCase::OneFrontAndEnd => t
            .checked_sub(1)
            .zip((overlap - 1 - t).checked_sub(1)),
        TruncationCase::OneFront => t.checked_sub(1).map(|f| (f, overlap - 1 - t)),
        TruncationCase::OneEnd => (overlap - 1 - t).checked_sub(1).map(|r| (t, r)),
        TruncationCase::SameLength => Some((t, overlap - 1 - t)),
    };
    pair.ok_or_else(|| {
        FbmcError::InvalidConfig(format!(
            "case {} undefined for K={overlap} (not enough tails)",
            case.name()
        ))
    })
}
