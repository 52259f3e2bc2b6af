//! Property tests: operator invariants over random seeds and inputs.

use std::collections::HashMap;

use proptest::prelude::*;

use cookbook_core::dataset::DatasetRecord;
use cookbook_core::templates::{generate_sample, GeneratorId, TemplateId, TemplateParams};
use cookbook_core::token_space::{
    get_span, overlap, replace, sample_tokens, shuffle, Rng, TokenSequence, Vocabulary,
};

fn counts<T: std::hash::Hash + Eq + Clone>(items: &[T]) -> HashMap<T, usize> {
    let mut map = HashMap::new();
    for item in items {
        *map.entry(item.clone()).or_insert(0) += 1;
    }
    map
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // Identical inputs and RNG state produce identical outputs.
    #[test]
    fn ops_are_deterministic(seed in any::<u64>(), n in 1usize..64, vocab_size in 1usize..500) {
        let vocab = Vocabulary::synthetic(vocab_size).unwrap();
        let a = sample_tokens(&vocab, n, &mut Rng::new(seed)).unwrap();
        let b = sample_tokens(&vocab, n, &mut Rng::new(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        let ra = replace(&a, 0.5, &vocab, &mut Rng::new(seed ^ 1)).unwrap();
        let rb = replace(&b, 0.5, &vocab, &mut Rng::new(seed ^ 1)).unwrap();
        prop_assert_eq!(ra, rb);
        let sa = get_span(&a, 1 + n / 2, &mut Rng::new(seed ^ 2)).unwrap();
        let sb = get_span(&b, 1 + n / 2, &mut Rng::new(seed ^ 2)).unwrap();
        prop_assert_eq!(sa, sb);
        let mut pa: Vec<u32> = a.ids().to_vec();
        let mut pb: Vec<u32> = b.ids().to_vec();
        shuffle(&mut pa, &mut Rng::new(seed ^ 3));
        shuffle(&mut pb, &mut Rng::new(seed ^ 3));
        prop_assert_eq!(pa, pb);
    }

    #[test]
    fn sampled_ids_stay_in_range(seed in any::<u64>(), n in 0usize..128, vocab_size in 1usize..2000) {
        let vocab = Vocabulary::synthetic(vocab_size).unwrap();
        let seq = sample_tokens(&vocab, n, &mut Rng::new(seed)).unwrap();
        prop_assert_eq!(seq.len(), n);
        prop_assert!(seq.ids().iter().all(|&id| (id as usize) < vocab_size));
    }

    // replace(prob = 0) is the identity and replace preserves length.
    #[test]
    fn replace_identity_and_length(seed in any::<u64>(), n in 0usize..64, prob in 0.0f64..=1.0) {
        let vocab = Vocabulary::synthetic(100).unwrap();
        let seq = sample_tokens(&vocab, n, &mut Rng::new(seed)).unwrap();
        let unchanged = replace(&seq, 0.0, &vocab, &mut Rng::new(seed ^ 99)).unwrap();
        prop_assert_eq!(&unchanged, &seq);
        let replaced = replace(&seq, prob, &vocab, &mut Rng::new(seed ^ 7)).unwrap();
        prop_assert_eq!(replaced.len(), seq.len());
    }

    // shuffle preserves the multiset.
    #[test]
    fn shuffle_preserves_multiset(seed in any::<u64>(), items in prop::collection::vec(0u32..50, 0..64)) {
        let mut shuffled = items.clone();
        shuffle(&mut shuffled, &mut Rng::new(seed));
        prop_assert_eq!(counts(&shuffled), counts(&items));
    }

    // get_span output is a contiguous subslice at the reported start.
    #[test]
    fn span_is_contiguous_subslice(
        seed in any::<u64>(),
        (len, span_len) in (1usize..64).prop_flat_map(|len| (Just(len), 1usize..=len)),
    ) {
        let vocab = Vocabulary::synthetic(64).unwrap();
        let seq = sample_tokens(&vocab, len, &mut Rng::new(seed)).unwrap();
        let (span, start) = get_span(&seq, span_len, &mut Rng::new(seed ^ 3)).unwrap();
        prop_assert!(start + span_len <= len);
        prop_assert_eq!(span.ids(), &seq.ids()[start..start + span_len]);
    }

    // overlap is symmetric, bounded by each side's distinct count, and
    // self-overlap counts distinct ids.
    #[test]
    fn overlap_properties(a in prop::collection::vec(0u32..30, 0..48), b in prop::collection::vec(0u32..30, 0..48)) {
        let sa = TokenSequence::new(a.clone());
        let sb = TokenSequence::new(b.clone());
        let o = overlap(&sa, &sb);
        prop_assert_eq!(o, overlap(&sb, &sa));
        let da = counts(&a).len();
        let db = counts(&b).len();
        prop_assert!(o <= da.min(db));
        prop_assert_eq!(overlap(&sa, &sa), da);
    }

    // Dataset records survive a JSONL round trip bit-for-bit.
    #[test]
    fn dataset_record_round_trip(seed in any::<u64>(), index in 0u64..1000, which in 0usize..7) {
        let template = TemplateId::ALL[which];
        let vocab = Vocabulary::synthetic(300).unwrap();
        let params = TemplateParams::defaults(template);
        let sample = generate_sample(GeneratorId::Template(template), &vocab, &params, seed, index).unwrap();
        let record = DatasetRecord::from_sample(&sample, index);
        let line = serde_json::to_string(&record).unwrap();
        let parsed: DatasetRecord = serde_json::from_str(&line).unwrap();
        prop_assert_eq!(&parsed, &record);
        let rebuilt = parsed.into_sample(seed).unwrap();
        prop_assert_eq!(rebuilt, sample);
    }
}
