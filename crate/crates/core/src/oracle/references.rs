use std::sync::LazyLock;

use serde::Deserialize;

const FCI_CSV: &str = include_str!("../../fixtures/fci_references.csv");
const ED_CSV: &str = include_str!("../../fixtures/ed_references.csv");

/// Frozen ground-state energy of one `(system, sector)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub key: String,
    pub e0: f64,
    pub provenance: String,
}

#[derive(Deserialize)]
struct FciRow {
    fixture: String,
    e_fci: f64,
    provenance: String,
}

#[derive(Deserialize)]
struct EdRow {
    key: String,
    e0: f64,
    provenance: String,
}

/// Shipped reference energies. FCIDUMP fixtures are keyed `fcidump/<file stem>`.
pub static REFERENCES: LazyLock<Vec<ReferenceEntry>> = LazyLock::new(|| {
    let mut out = Vec::new();
    let mut fci = csv::Reader::from_reader(FCI_CSV.as_bytes());
    for row in fci.deserialize::<FciRow>() {
        let row = row.expect("malformed fci_references.csv");
        out.push(ReferenceEntry {
            key: format!("fcidump/{}", row.fixture),
            e0: row.e_fci,
            provenance: row.provenance,
        });
    }
    let mut ed = csv::Reader::from_reader(ED_CSV.as_bytes());
    for row in ed.deserialize::<EdRow>() {
        let row = row.expect("malformed ed_references.csv");
        out.push(ReferenceEntry {
            key: row.key,
            e0: row.e0,
            provenance: row.provenance,
        });
    }
    out
});

pub fn reference_energy(key: &str) -> Option<f64> {
    REFERENCES.iter().find(|r| r.key == key).map(|r| r.e0)
}
