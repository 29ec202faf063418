//! The bundled example projects.

use crate::error::Result;
use crate::frontend::parse_project;
use crate::mapping::TheoryPair;

pub const LOGISTICS_HIGH: &str = include_str!("../fixtures/logistics/high.bat");
pub const LOGISTICS_HIGH_COMPLETE: &str = include_str!("../fixtures/logistics/high_complete.bat");
pub const LOGISTICS_HIGH_ONESHOT: &str = include_str!("../fixtures/logistics/high_oneshot.bat");
pub const LOGISTICS_LOW: &str = include_str!("../fixtures/logistics/low.bat");
pub const LOGISTICS_LOW_ONESHOT: &str = include_str!("../fixtures/logistics/low_oneshot.bat");
pub const LOGISTICS_MAPPING: &str = include_str!("../fixtures/logistics/mapping.map");
pub const ABPQR_HIGH: &str = include_str!("../fixtures/abpqr/high.bat");
pub const ABPQR_LOW: &str = include_str!("../fixtures/abpqr/low.bat");
pub const ABPQR_MAPPING: &str = include_str!("../fixtures/abpqr/mapping.map");
pub const OVERLAP_HIGH: &str = include_str!("../fixtures/overlap/high.bat");
pub const OVERLAP_LOW: &str = include_str!("../fixtures/overlap/low.bat");
pub const OVERLAP_MAPPING: &str = include_str!("../fixtures/overlap/mapping.map");

/// Route planning and delivery, with the priority of the shipment unknown
/// at the high level.
pub fn logistics() -> Result<TheoryPair> {
    parse_project(LOGISTICS_HIGH, LOGISTICS_LOW, LOGISTICS_MAPPING)
}

/// [`logistics`] with the high-level initial state fully specified.
pub fn logistics_complete() -> Result<TheoryPair> {
    parse_project(LOGISTICS_HIGH_COMPLETE, LOGISTICS_LOW, LOGISTICS_MAPPING)
}

/// [`logistics`] where delivery, unloading and signing can each happen
/// only once.
pub fn logistics_oneshot() -> Result<TheoryPair> {
    parse_project(
        LOGISTICS_HIGH_ONESHOT,
        LOGISTICS_LOW_ONESHOT,
        LOGISTICS_MAPPING,
    )
}

/// Propositional theories where the high level is complete but not sound.
pub fn abpqr() -> Result<TheoryPair> {
    parse_project(ABPQR_HIGH, ABPQR_LOW, ABPQR_MAPPING)
}

/// Two high-level actions whose refinements overlap.
pub fn overlap() -> Result<TheoryPair> {
    parse_project(OVERLAP_HIGH, OVERLAP_LOW, OVERLAP_MAPPING)
}
