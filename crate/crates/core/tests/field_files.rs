use aniso_hardy::field::{load_field, save_field};
use aniso_hardy::{Error, Field, GridSpec};
use num_complex::Complex64;

fn sample() -> Field {
    let spec = GridSpec::product_1d(4.0, 16, 2.0, 32).unwrap();
    Field::from_fn(&spec, |x| Complex64::new(x[0].sin(), x[1] * x[1]))
}

#[test]
fn saved_fields_load_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.field");
    let f = sample();
    save_field(&path, &f).unwrap();
    let g = load_field(&path).unwrap();
    assert_eq!(g.spec(), f.spec());
    assert_eq!(g.values(), f.values());
}

#[test]
fn truncated_and_foreign_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.field");
    save_field(&path, &sample()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(load_field(&path), Err(Error::Format(_))));
    let text = String::from_utf8_lossy(&bytes[..bytes.iter().position(|b| *b == b'\n').unwrap()]).replace("little", "big");
    std::fs::write(&path, format!("{text}\n")).unwrap();
    assert!(matches!(load_field(&path), Err(Error::Format(_))));
    std::fs::write(&path, b"no header").unwrap();
    assert!(matches!(load_field(&path), Err(Error::Format(_))));
}
