//! Shared fixtures for unit tests.

use std::collections::VecDeque;

use num_bigint::BigUint;
use rand::RngCore;

use crate::dealer::SecretVector;
use crate::field::Modulus;
use crate::orgchart::{Edge, OrgChart, Participant};

pub fn example_modulus() -> Modulus {
    Modulus::from_u64(4_294_967_311).unwrap()
}

/// Nine employees on three levels: 1..=6 at level 1, 7 and 8 at level 2, 9 on top.
pub fn example_chart() -> OrgChart {
    let mut people: Vec<Participant> = (1..=6).map(|i| Participant::new(i, 1)).collect();
    people.push(Participant::new(7, 2));
    people.push(Participant::new(8, 2));
    people.push(Participant::new(9, 3));
    let edges = [
        (9, 8),
        (9, 7),
        (8, 1),
        (8, 2),
        (8, 3),
        (7, 4),
        (7, 5),
        (7, 6),
    ]
    .map(|(parent, child)| Edge { parent, child });
    OrgChart::new(3, people, edges).unwrap()
}

/// `k = (4967295, 94967, 9496729)`, `a0 = 429496`.
pub fn example_secret() -> SecretVector {
    let q = example_modulus();
    SecretVector::new(
        vec![
            q.element(4_967_295u64),
            q.element(94_967u64),
            q.element(9_496_729u64),
        ],
        q.element(429_496u64),
    )
    .unwrap()
}

/// Replays scripted bytes; panics when exhausted.
#[derive(Default)]
pub struct ScriptedRng {
    bytes: VecDeque<u8>,
}

impl ScriptedRng {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_u32(self, value: u32) -> Self {
        self.push_le(value as u64, 4)
    }

    pub fn push_le(mut self, value: u64, width: usize) -> Self {
        let mut bytes = BigUint::from(value).to_bytes_le();
        bytes.resize(width, 0);
        self.bytes.extend(bytes);
        self
    }
}

impl RngCore for ScriptedRng {
    fn next_u32(&mut self) -> u32 {
        let mut b = [0u8; 4];
        self.fill_bytes(&mut b);
        u32::from_le_bytes(b)
    }

    fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.fill_bytes(&mut b);
        u64::from_le_bytes(b)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for b in dest {
            *b = self.bytes.pop_front().expect("scripted rng exhausted");
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
