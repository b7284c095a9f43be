//! Stream identities: one replica, one stream, reproducible everywhere.

use svoter_core::stream::{derive_stream, Stream};

/// The full identity of a derived stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedDerivation {
    pub master_seed: u64,
    pub stream_id: String,
    pub replica_index: u64,
}

impl SeedDerivation {
    pub fn new(master_seed: u64, stream_id: impl Into<String>, replica_index: u64) -> Self {
        SeedDerivation {
            master_seed,
            stream_id: stream_id.into(),
            replica_index,
        }
    }

    /// The counter-based generator keyed by this identity.
    pub fn stream(&self) -> Stream {
        derive_stream(self.master_seed, &self.stream_id, self.replica_index)
    }

    /// Provenance string echoed into reports and CSV rows.
    pub fn provenance(&self) -> String {
        format!(
            "{:#018x}/{}/{}",
            self.master_seed, self.stream_id, self.replica_index
        )
    }
}
