//! Justice roster and name canonicalization.
//!
//! Canonical justice ids are the SCDB `justiceName` codes (`SAAlito`,
//! `RBGinsburg`, ...). Full display names are accepted wherever an id is
//! expected and mapped back onto the code.

/// One bench seat: SCDB code plus display name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Justice {
    pub id: &'static str,
    pub name: &'static str,
}

const KNOWN: &[Justice] = &[
    Justice { id: "JGRoberts", name: "John Roberts" },
    Justice { id: "AScalia", name: "Antonin Scalia" },
    Justice { id: "AMKennedy", name: "Anthony Kennedy" },
    Justice { id: "CThomas", name: "Clarence Thomas" },
    Justice { id: "RBGinsburg", name: "Ruth Bader Ginsburg" },
    Justice { id: "SGBreyer", name: "Stephen Breyer" },
    Justice { id: "SAAlito", name: "Samuel Alito" },
    Justice { id: "SSotomayor", name: "Sonia Sotomayor" },
    Justice { id: "EKagan", name: "Elena Kagan" },
    Justice { id: "JPStevens", name: "John Paul Stevens" },
    Justice { id: "DHSouter", name: "David Souter" },
    Justice { id: "SDOConnor", name: "Sandra Day O'Connor" },
    Justice { id: "WHRehnquist", name: "William Rehnquist" },
    Justice { id: "NMGorsuch", name: "Neil Gorsuch" },
    Justice { id: "BMKavanaugh", name: "Brett Kavanaugh" },
    Justice { id: "ACBarrett", name: "Amy Coney Barrett" },
];

/// The 2010-2016 bench, in seniority order.
pub const ROBERTS_IV: [&str; 9] = [
    "JGRoberts",
    "AScalia",
    "AMKennedy",
    "CThomas",
    "RBGinsburg",
    "SGBreyer",
    "SAAlito",
    "SSotomayor",
    "EKagan",
];

/// Tag used for the 2010-2016 natural court.
pub const ROBERTS_IV_TAG: &str = "Roberts IV";

pub fn roberts_iv() -> Vec<String> {
    ROBERTS_IV.iter().map(|s| s.to_string()).collect()
}

/// Maps a code or display name (case- and whitespace-insensitive) to the
/// canonical id. Unknown names pass through trimmed.
pub fn canonical_id(name: &str) -> String {
    let key = normalize(name);
    KNOWN
        .iter()
        .find(|j| normalize(j.id) == key || normalize(j.name) == key)
        .map(|j| j.id.to_string())
        .unwrap_or_else(|| name.trim().to_string())
}

/// Display name for a canonical id, or the id itself when unknown.
pub fn display_name(id: &str) -> &str {
    KNOWN.iter().find(|j| j.id == id).map(|j| j.name).unwrap_or(id)
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// SCDB `naturalCourt` codes for the Roberts courts.
pub fn natural_court_label(code: &str) -> String {
    let label = match code.trim() {
        "1701" => "Roberts I",
        "1702" => "Roberts II",
        "1703" => "Roberts III",
        "1704" => "Roberts IV",
        "1705" => "Roberts V",
        "1706" => "Roberts VI",
        "1707" => "Roberts VII",
        "1708" => "Roberts VIII",
        other => return other.to_string(),
    };
    label.to_string()
}
