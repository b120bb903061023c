use modlab::modcode::{
    codeword_weight, encode, info_position, min_distance, pair_count, row_support, InfoWord,
    PairIndex,
};
use proptest::prelude::*;

fn word(bits: &[u8]) -> Vec<u8> {
    encode(&InfoWord::new(bits.to_vec()).unwrap(), bits.len()).unwrap()
}

fn weight(bits: &[u8]) -> usize {
    word(bits).iter().map(|&b| usize::from(b)).sum()
}

#[test]
fn exhaustive_weights_small_m() {
    for m in 2..=10 {
        let mut min_nonzero = usize::MAX;
        for w in 1u32..(1 << m) {
            let bits: Vec<u8> = (0..m).map(|k| ((w >> k) & 1) as u8).collect();
            let s = w.count_ones() as usize;
            let wt = weight(&bits);
            assert_eq!(wt, codeword_weight(s, m).unwrap(), "m={m} w={w:b}");
            min_nonzero = min_nonzero.min(wt);
        }
        assert_eq!(min_nonzero, min_distance(m));
    }
}

#[test]
fn rows_have_weight_m_and_overlap_in_one_parity() {
    let m = 9;
    for p in 1..=m {
        let support: Vec<usize> = row_support(p, m).collect();
        assert_eq!(support.len(), m);
        assert!(support.contains(&info_position(p)));
        let mut unit = vec![0u8; m];
        unit[p - 1] = 1;
        let expected: Vec<usize> = word(&unit)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(k, _)| k)
            .collect();
        let mut sorted = support.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, expected);
        for q in (p + 1)..=m {
            let shared: Vec<usize> = row_support(q, m).filter(|k| support.contains(k)).collect();
            assert_eq!(shared, vec![PairIndex::new(p, q).linear()]);
        }
    }
}

proptest! {
    #[test]
    fn encoding_is_linear(
        (a, b) in (2usize..40).prop_flat_map(|m| (
            proptest::collection::vec(0u8..2, m),
            proptest::collection::vec(0u8..2, m),
        ))
    ) {
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let lhs = word(&sum);
        let rhs: Vec<u8> = word(&a).iter().zip(word(&b)).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(lhs.len(), pair_count(a.len()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn weight_depends_only_on_row_count(bits in proptest::collection::vec(0u8..2, 2..60)) {
        let m = bits.len();
        let s = bits.iter().filter(|&&b| b == 1).count();
        prop_assert_eq!(weight(&bits), codeword_weight(s, m).unwrap());
    }

    #[test]
    fn systematic_positions_carry_the_information(bits in proptest::collection::vec(0u8..2, 2..40)) {
        let w = word(&bits);
        for (k, &b) in bits.iter().enumerate() {
            prop_assert_eq!(w[info_position(k + 1)], b);
        }
    }
}
