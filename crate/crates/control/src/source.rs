//! Hop sources feeding the service's audio thread.

/// Anything that can produce consecutive hops of mono 48 kHz audio.
///
/// A live-capture backend implements the same contract; the service only needs hops.
pub trait HopSource: Send {
    /// Fills `hop` with the next samples. Returns false when the source is exhausted.
    fn next_hop(&mut self, hop: &mut [f32]) -> bool;

    fn describe(&self) -> String;
}

/// Loops a buffer forever (the file-loop source).
pub struct LoopSource {
    samples: Vec<f32>,
    pos: usize,
    name: String,
}

impl LoopSource {
    /// `samples` must be non-empty.
    pub fn new(samples: Vec<f32>, name: impl Into<String>) -> Option<Self> {
        (!samples.is_empty()).then(|| Self { samples, pos: 0, name: name.into() })
    }
}

impl HopSource for LoopSource {
    fn next_hop(&mut self, hop: &mut [f32]) -> bool {
        for v in hop.iter_mut() {
            *v = self.samples[self.pos];
            self.pos = (self.pos + 1) % self.samples.len();
        }
        true
    }

    fn describe(&self) -> String {
        format!("loop:{}", self.name)
    }
}
