use serde::{Deserialize, Serialize};

use super::InputEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

/// Width of each of `tv_sec` and `tv_usec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TimeWidth {
    Bits32,
    #[default]
    Bits64,
}

/// Layout of a `struct input_event` record. Defaults to the 24-byte
/// little-endian layout of 64-bit devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinaryLayout {
    pub time_width: TimeWidth,
    pub byte_order: ByteOrder,
}

impl BinaryLayout {
    pub const fn record_size(&self) -> usize {
        match self.time_width {
            TimeWidth::Bits32 => 16,
            TimeWidth::Bits64 => 24,
        }
    }

    fn time_bytes(&self) -> usize {
        match self.time_width {
            TimeWidth::Bits32 => 4,
            TimeWidth::Bits64 => 8,
        }
    }

    fn read_uint(&self, bytes: &[u8]) -> u64 {
        let mut v = 0u64;
        match self.byte_order {
            ByteOrder::Little => {
                for &b in bytes.iter().rev() {
                    v = (v << 8) | u64::from(b);
                }
            }
            ByteOrder::Big => {
                for &b in bytes {
                    v = (v << 8) | u64::from(b);
                }
            }
        }
        v
    }

    fn write_uint(&self, out: &mut Vec<u8>, v: u64, width: usize) {
        let le = v.to_le_bytes();
        match self.byte_order {
            ByteOrder::Little => out.extend_from_slice(&le[..width]),
            ByteOrder::Big => out.extend(le[..width].iter().rev()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedStream {
    pub events: Vec<InputEvent>,
    /// Bytes left over after the last complete record.
    pub remainder: usize,
}

/// Decodes every complete record in `bytes`. The device index is not part of
/// the record, so the caller supplies it.
pub fn decode_binary_stream(bytes: &[u8], layout: BinaryLayout, device_index: u32) -> DecodedStream {
    let size = layout.record_size();
    let tw = layout.time_bytes();
    let chunks = bytes.chunks_exact(size);
    let remainder = chunks.remainder().len();
    let events = chunks
        .map(|rec| {
            let sec = layout.read_uint(&rec[..tw]);
            let usec = layout.read_uint(&rec[tw..2 * tw]);
            let body = &rec[2 * tw..];
            InputEvent {
                timestamp: sec.wrapping_mul(1_000_000).wrapping_add(usec),
                device_index,
                ev_type: layout.read_uint(&body[0..2]) as u16,
                ev_code: layout.read_uint(&body[2..4]) as u16,
                ev_value: layout.read_uint(&body[4..8]) as u32 as i32,
            }
        })
        .collect();
    DecodedStream { events, remainder }
}

/// Encodes events as raw records. Device indices are dropped. With the
/// 32-bit layout, timestamps whose seconds exceed `u32::MAX` are truncated.
pub fn encode_binary_stream(events: &[InputEvent], layout: BinaryLayout) -> Vec<u8> {
    let tw = layout.time_bytes();
    let mut out = Vec::with_capacity(events.len() * layout.record_size());
    for ev in events {
        layout.write_uint(&mut out, ev.timestamp / 1_000_000, tw);
        layout.write_uint(&mut out, ev.timestamp % 1_000_000, tw);
        layout.write_uint(&mut out, u64::from(ev.ev_type), 2);
        layout.write_uint(&mut out, u64::from(ev.ev_code), 2);
        layout.write_uint(&mut out, u64::from(ev.ev_value as u32), 4);
    }
    out
}
