use super::{BinaryMask, RasterError};
use serde::{Deserialize, Serialize};

/// Row-major run-length encoding of a mask. `counts` alternates unset/set runs
/// and always starts with an unset run (possibly of length zero).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLength {
    pub size: [u32; 2],
    pub counts: Vec<u64>,
}

pub fn encode_rle(mask: &BinaryMask) -> RunLength {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for &b in mask.bits() {
        if b == current {
            run += 1;
        } else {
            counts.push(run);
            current = b;
            run = 1;
        }
    }
    counts.push(run);
    RunLength {
        size: [mask.width(), mask.height()],
        counts,
    }
}

pub fn decode_rle(rle: &RunLength) -> Result<BinaryMask, RasterError> {
    let [w, h] = rle.size;
    let total = u64::from(w) * u64::from(h);
    let sum: u64 = rle.counts.iter().sum();
    if sum != total {
        return Err(RasterError::Geometry(format!(
            "run lengths sum to {sum}, mask has {total} pixels"
        )));
    }
    let mut bits = Vec::with_capacity(total as usize);
    let mut value = false;
    for &c in &rle.counts {
        bits.extend(std::iter::repeat(value).take(c as usize));
        value = !value;
    }
    BinaryMask::from_bits(w, h, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rle_round_trips(w in 1u32..12, h in 1u32..12, seed in any::<u64>()) {
            let m = BinaryMask::from_fn(w, h, |x, y| {
                (seed >> ((x * 7 + y * 3) % 64)) & 1 == 1
            });
            let rle = encode_rle(&m);
            prop_assert_eq!(decode_rle(&rle).unwrap(), m);
        }
    }

    #[test]
    fn rejects_wrong_total() {
        let rle = RunLength { size: [2, 2], counts: vec![1, 2] };
        assert!(decode_rle(&rle).is_err());
    }
}
