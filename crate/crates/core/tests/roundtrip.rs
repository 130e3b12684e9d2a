use margin_tensor::{fold, DenseTensor, LabeledDataset};
use proptest::prelude::*;

fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
    prop::collection::vec(1usize..=4, 1..=4).prop_flat_map(|dims| {
        let len: usize = dims.iter().product();
        prop::collection::vec(-1e3f64..1e3, len)
            .prop_map(move |data| DenseTensor::new(dims.clone(), data).unwrap())
    })
}

fn dataset_strategy() -> impl Strategy<Value = LabeledDataset> {
    (prop::collection::vec(1usize..=3, 1..=3), 1u32..=3, 1usize..=3).prop_flat_map(
        |(dims, classes, extra)| {
            let len: usize = dims.iter().product();
            let n = classes as usize + extra;
            (prop::collection::vec(prop::num::f64::ANY, len * n), prop::collection::vec(1..=classes, extra))
                .prop_map(move |(data, extra_labels)| {
                    let tensors = data
                        .chunks(len)
                        .map(|c| DenseTensor::new(dims.clone(), c.to_vec()).unwrap())
                        .collect();
                    // Every class appears at least once.
                    let labels = (1..=classes).chain(extra_labels).collect();
                    LabeledDataset::new(tensors, labels, classes).unwrap()
                })
        },
    )
}

proptest! {
    #[test]
    fn fold_inverts_unfold(t in tensor_strategy()) {
        for mode in 0..t.order() {
            let m = t.unfold(mode).unwrap();
            prop_assert_eq!(m.nrows(), t.dims()[mode]);
            prop_assert_eq!(&fold(&m, mode, t.dims()).unwrap(), &t);
        }
    }

    #[test]
    fn dataset_bytes_round_trip(ds in dataset_strategy()) {
        let bytes = ds.to_bytes();
        let back = LabeledDataset::from_bytes(&bytes).unwrap();
        // Compare bit patterns so NaN payloads count as equal.
        prop_assert_eq!(back.labels(), ds.labels());
        prop_assert_eq!(back.dims(), ds.dims());
        for (a, b) in back.tensors().iter().zip(ds.tensors()) {
            let bits = |t: &DenseTensor| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(a), bits(b));
        }
        prop_assert_eq!(back.to_bytes(), bytes);
    }
}
