use std::path::Path;

use omffm::ArchiveEntry;
use omffm_cli::{write_atomic, FrontFile};
use proptest::prelude::*;

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3..1e3f64]
}

proptest! {
    #[test]
    fn write_then_read_is_lossless(
        n in 0usize..5,
        m in 1usize..4,
        rows in prop::collection::vec(prop::collection::vec(value(), 8), 0..20),
        seed in any::<u64>(),
    ) {
        let entries: Vec<ArchiveEntry> = rows
            .iter()
            .map(|r| ArchiveEntry::new(r[..n].to_vec(), r[n..n + m].to_vec()))
            .collect();
        let front = FrontFile {
            problem: Some("X".into()),
            solver: Some("s".into()),
            seed: Some(seed),
            n,
            m,
            entries,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_atomic(&path, front.to_csv().as_bytes()).unwrap();
        let back = FrontFile::read(&path).unwrap();
        prop_assert_eq!((back.n, back.m, back.seed), (n, m, Some(seed)));
        prop_assert_eq!(back.entries.len(), front.entries.len());
        for (a, b) in back.entries.iter().zip(&front.entries) {
            for (x, y) in a.x.iter().chain(&a.f).zip(b.x.iter().chain(&b.f)) {
                prop_assert!((x - y).abs() <= 1e-15 * y.abs().max(1.0));
            }
        }
    }
}

#[test]
fn atomic_write_replaces_existing_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("out.txt");
    write_atomic(&path, b"first").unwrap();
    write_atomic(&path, b"second").unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), b"second");
    let leftovers = std::fs::read_dir(path.parent().unwrap()).unwrap().count();
    assert_eq!(leftovers, 1);
    assert!(FrontFile::read(Path::new("/nonexistent/f.csv")).unwrap_err().exit_code() == 5);
}
