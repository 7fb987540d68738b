//! Serializer and deserializer state machines.
//!
//! Wire order: stream 0 first, then stream 1 up to stream 7; each 32-bit word
//! goes out MSB first. A frame is 256 serial bits.

use crate::types::{Bitstream, ParallelFrame, FRAME_BITS, FRAME_STREAMS, WORD_BITS};

/// Drains one frame bit by bit.
#[derive(Debug, Clone)]
pub struct SerializerState {
    frame: ParallelFrame,
    stream_index: usize,
    bit_index: usize,
}

impl SerializerState {
    pub fn new(frame: ParallelFrame) -> Self {
        Self {
            frame,
            stream_index: 0,
            bit_index: 0,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.stream_index == FRAME_STREAMS
    }

    /// Next serial bit, or `None` once all 256 bits have been emitted.
    pub fn step(&mut self) -> Option<bool> {
        if self.is_complete() {
            return None;
        }
        let word = self.frame.streams[self.stream_index];
        let bit = (word >> (WORD_BITS - 1 - self.bit_index)) & 1 == 1;
        self.bit_index += 1;
        if self.bit_index == WORD_BITS {
            self.bit_index = 0;
            self.stream_index += 1;
        }
        Some(bit)
    }
}

impl Iterator for SerializerState {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        self.step()
    }
}

/// Accumulates serial bits into frames.
#[derive(Debug, Clone, Default)]
pub struct DeserializerState {
    streams: [u32; FRAME_STREAMS],
    stream_index: usize,
    bit_index: usize,
}

impl DeserializerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bits accepted towards the frame currently being assembled.
    pub fn pending_bits(&self) -> usize {
        self.stream_index * WORD_BITS + self.bit_index
    }

    /// Accepts one bit; returns the frame when it is the 256th.
    pub fn push(&mut self, bit: bool) -> Option<ParallelFrame> {
        let word = &mut self.streams[self.stream_index];
        *word = (*word << 1) | bit as u32;
        self.bit_index += 1;
        if self.bit_index == WORD_BITS {
            self.bit_index = 0;
            self.stream_index += 1;
        }
        if self.stream_index == FRAME_STREAMS {
            let frame = ParallelFrame::new(self.streams);
            *self = Self::default();
            Some(frame)
        } else {
            None
        }
    }
}

pub fn serialize(frames: &[ParallelFrame]) -> Bitstream {
    let mut bits = Vec::with_capacity(frames.len() * FRAME_BITS);
    for &f in frames {
        bits.extend(SerializerState::new(f));
    }
    Bitstream(bits)
}

/// Frames from every complete 256-bit group, plus the number of trailing bits
/// that did not fill a frame.
pub fn deserialize(bits: &Bitstream) -> (Vec<ParallelFrame>, usize) {
    let mut des = DeserializerState::new();
    let frames = bits.bits().iter().filter_map(|&b| des.push(b)).collect();
    (frames, des.pending_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frames(rng: &mut ChaCha8Rng, n: usize) -> Vec<ParallelFrame> {
        (0..n).map(|_| ParallelFrame::new(rng.random())).collect()
    }

    #[test]
    fn zero_frame() {
        let bits = serialize(&[ParallelFrame::default()]);
        assert_eq!(bits.len(), 256);
        assert_eq!(bits.count_ones(), 0);
    }

    #[test]
    fn first_wire_bit_is_stream0_msb() {
        let mut f = ParallelFrame::default();
        f.streams[0] = 0x8000_0000;
        let bits = serialize(&[f]);
        assert!(bits.bits()[0]);
        assert_eq!(bits.count_ones(), 1);
    }

    #[test]
    fn stream_order_on_wire() {
        let mut f = ParallelFrame::default();
        f.streams[3] = 1;
        let bits = serialize(&[f]);
        let pos: Vec<usize> = (0..256).filter(|&i| bits.bits()[i]).collect();
        assert_eq!(pos, vec![4 * 32 - 1]);
    }

    #[test]
    fn serializer_signals_completion() {
        let mut s = SerializerState::new(ParallelFrame::new([u32::MAX; 8]));
        assert_eq!((&mut s).count(), 256);
        assert!(s.is_complete());
        assert_eq!(s.step(), None);
    }

    #[test]
    fn zeros_make_one_frame() {
        let (frames, left) = deserialize(&Bitstream(vec![false; 256]));
        assert_eq!(frames, vec![ParallelFrame::default()]);
        assert_eq!(left, 0);
    }

    #[test]
    fn leftover_is_reported() {
        let (frames, left) = deserialize(&Bitstream(vec![true; 300]));
        assert_eq!(frames.len(), 1);
        assert_eq!(left, 44);
    }

    #[test]
    fn thousand_random_frames_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let frames = random_frames(&mut rng, 1000);
        let (back, left) = deserialize(&serialize(&frames));
        assert_eq!(left, 0);
        assert_eq!(back, frames);
    }

    proptest! {
        #[test]
        fn round_trip(words in prop::collection::vec(any::<[u32; 8]>(), 0..20)) {
            let frames: Vec<_> = words.into_iter().map(ParallelFrame::new).collect();
            let (back, left) = deserialize(&serialize(&frames));
            prop_assert_eq!(left, 0);
            prop_assert_eq!(back, frames);
        }

        #[test]
        fn serialize_is_length_homomorphic(
            a in prop::collection::vec(any::<[u32; 8]>(), 0..6),
            b in prop::collection::vec(any::<[u32; 8]>(), 0..6),
        ) {
            let a: Vec<_> = a.into_iter().map(ParallelFrame::new).collect();
            let b: Vec<_> = b.into_iter().map(ParallelFrame::new).collect();
            let joined: Vec<_> = a.iter().chain(&b).copied().collect();
            let mut cat = serialize(&a).0;
            cat.extend(serialize(&b).0);
            prop_assert_eq!(serialize(&joined).0, cat);
        }
    }
}
