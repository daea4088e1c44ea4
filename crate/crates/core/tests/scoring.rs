use proptest::prelude::*;

use virtual_eyes::scoring::{
    load_pooled_csv, load_scores_csv, pool_patient, pool_table, read_pooled_csv, read_scores_csv,
    write_pooled_csv, write_pooled_csv_to, PatientScore, Pooling,
};

fn scores() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..=1.0, 1..60)
}

proptest! {
    #[test]
    fn pooling_order(s in scores(), k in 1usize..80) {
        let mean = pool_patient(&s, Pooling::Mean).unwrap();
        let max = pool_patient(&s, Pooling::Max).unwrap();
        let topk = pool_patient(&s, Pooling::TopK(k)).unwrap();
        prop_assert!(max >= topk && topk >= mean - 1e-15);
        prop_assert_eq!(pool_patient(&s, Pooling::TopK(1)).unwrap(), max);
        prop_assert_eq!(pool_patient(&s, Pooling::TopK(s.len())).unwrap(), mean);
        prop_assert!((0.0..=1.0).contains(&mean));
    }

    #[test]
    fn pooling_ignores_slice_order(s in scores(), k in 1usize..10, seed in any::<u64>()) {
        let mut shuffled = s.clone();
        let n = shuffled.len();
        let mut x = seed | 1;
        for i in (1..n).rev() {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            shuffled.swap(i, (x % (i as u64 + 1)) as usize);
        }
        for p in [Pooling::Mean, Pooling::Max, Pooling::TopK(k)] {
            prop_assert_eq!(pool_patient(&s, p).unwrap(), pool_patient(&shuffled, p).unwrap());
        }
    }

    #[test]
    fn pooled_csv_round_trips(
        rows in proptest::collection::btree_map("[a-z0-9,\" ]{1,8}", (0.0f64..=1.0, 0u8..2), 1..20),
        k in 1usize..6,
    ) {
        let pooled: Vec<PatientScore> = rows
            .into_iter()
            .filter(|(id, _)| id.trim() == id.as_str())
            .map(|(patient_id, (score, label))| PatientScore {
                patient_id,
                score,
                label,
                pooling: Pooling::TopK(k),
            })
            .collect();
        let mut buf = Vec::new();
        write_pooled_csv_to(&pooled, &mut buf).unwrap();
        prop_assert_eq!(read_pooled_csv(buf.as_slice()).unwrap(), pooled);
    }
}

const SCORES: &str = "patient_id,series_uid,slice_index,score,label\n\
    b,s1,0,0.1,0\n\
    a,s1,0,0.2,1\n\
    a,s1,1,0.9,1\n\
    a,s2,0,0.4,1\n\
    b,s1,1,0.3,0\n";

#[test]
fn table_pools_per_patient_across_series() {
    let table = read_scores_csv(SCORES.as_bytes()).unwrap();
    let max = pool_table(&table, Pooling::Max).unwrap();
    let ids: Vec<&str> = max.iter().map(|p| p.patient_id.as_str()).collect();
    assert_eq!(ids, ["a", "b"]);
    assert_eq!((max[0].score, max[0].label), (0.9, 1));
    assert_eq!((max[1].score, max[1].label), (0.3, 0));
    let top2 = pool_table(&table, Pooling::TopK(2)).unwrap();
    assert!((top2[0].score - 0.65).abs() < 1e-12);
    assert!((top2[1].score - 0.2).abs() < 1e-12);
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scores_path = dir.path().join("scores.csv");
    std::fs::write(&scores_path, SCORES).unwrap();
    let table = load_scores_csv(&scores_path).unwrap();
    let pooled = pool_table(&table, Pooling::Mean).unwrap();
    let out = dir.path().join("pooled.csv");
    write_pooled_csv(&pooled, &out).unwrap();
    assert_eq!(load_pooled_csv(&out).unwrap(), pooled);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("patient_id,score,label,method,k\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",mean,")));
    assert_eq!(
        load_scores_csv(&dir.path().join("missing.csv"))
            .unwrap_err()
            .code(),
        "IO_ERROR"
    );
}

#[test]
fn malformed_inputs() {
    let cases = [
        (
            "patient_id,series_uid,slice_index,score\np,s,0,0.5\n",
            "SCHEMA_ERROR",
        ),
        (
            "patient_id,series_uid,slice_index,score,label\np,s,x,0.5,1\n",
            "SCHEMA_ERROR",
        ),
        (
            "patient_id,series_uid,slice_index,score,label\np,s,0,nan?,1\n",
            "SCHEMA_ERROR",
        ),
        (
            "patient_id,series_uid,slice_index,score,label\np,s,0,0.5\n",
            "SCHEMA_ERROR",
        ),
        (
            "patient_id,series_uid,slice_index,score,label\np,s,0,-0.1,1\n",
            "RANGE_ERROR",
        ),
        (
            "patient_id,series_uid,slice_index,score,label\np,s,0,NaN,1\n",
            "RANGE_ERROR",
        ),
        (
            "patient_id,series_uid,slice_index,score,label\np,s,0,0.5,1\np,t,0,0.5,0\n",
            "LABEL_CONFLICT",
        ),
    ];
    for (text, code) in cases {
        assert_eq!(
            read_scores_csv(text.as_bytes()).unwrap_err().code(),
            code,
            "{text}"
        );
    }
    let pooled = [
        (
            "patient_id,score,label,method,k\np,0.5,1,median,\n",
            "SCHEMA_ERROR",
        ),
        (
            "patient_id,score,label,method,k\np,0.5,1,topk,\n",
            "SCHEMA_ERROR",
        ),
        (
            "patient_id,score,label,method,k\np,0.5,1,mean,\np,0.4,1,mean,\n",
            "SCHEMA_ERROR",
        ),
        (
            "patient_id,score,label,method,k\np,1.5,1,mean,\n",
            "RANGE_ERROR",
        ),
    ];
    for (text, code) in pooled {
        assert_eq!(
            read_pooled_csv(text.as_bytes()).unwrap_err().code(),
            code,
            "{text}"
        );
    }
}

#[test]
fn pooling_spellings() {
    assert_eq!(
        Pooling::from_parts("topk", None).unwrap_err().code(),
        "CONFIG_ERROR"
    );
    assert_eq!(
        Pooling::from_parts("topk", Some(0)).unwrap_err().code(),
        "RANGE_ERROR"
    );
    assert_eq!(Pooling::TopK(4).to_string(), "top-4");
    assert_eq!("top-4".parse::<Pooling>().unwrap(), Pooling::TopK(4));
    assert_eq!("max".parse::<Pooling>().unwrap(), Pooling::Max);
}
