pub mod banded;
pub mod dense;
pub mod pivoted_qr;
pub mod range;
pub mod small;
pub mod snapshot;

pub use pivoted_qr::PivotedQr;
pub use range::IncrementalRange;
pub use snapshot::SnapshotBasis;
