#![no_main]

use genex::mapping::{CompressStrategy, MappingSpec};
use genex::{Bounds, Genotype};
use libfuzzer_sys::fuzz_target;

// Each 8-byte chunk becomes one gene; the raw bits are folded into [0, 1]
// unless they already form a value there, so edge cases like 1.0 and
// subnormals show up.
fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let genes: Vec<f64> = rest
        .chunks_exact(8)
        .map(|c| {
            let v = f64::from_le_bytes(c.try_into().unwrap());
            if (0.0..=1.0).contains(&v) {
                v
            } else {
                (u64::from_le_bytes(c.try_into().unwrap()) >> 11) as f64 / (1u64 << 53) as f64
            }
        })
        .collect();
    let Ok(genotype) = Genotype::new(genes) else { return };
    let strategy = if head & 1 == 0 { CompressStrategy::Sequential } else { CompressStrategy::Alternating };
    let spec = MappingSpec::Compress { strategy };
    let t = 2 * genotype.len() - usize::from(head & 2 != 0);
    let bounds = Bounds::SYMMETRIC_FIVE;
    let x = spec.decode(&genotype, t, bounds).unwrap();
    assert_eq!(x.len(), t);
    assert!(x.iter().all(|v| bounds.contains(*v)));
});
