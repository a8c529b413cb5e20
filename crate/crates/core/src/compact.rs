//! The compact array: one fixed-capacity permutation of vertex IDs per search
//! set, with a stack of per-level boundary pointers and an O(1) position
//! lookup table.
//!
//! Membership at the current level is purely positional: a vertex is active
//! iff its index is below the top boundary pointer. Removing a vertex swaps
//! it with the last active element and decrements the pointer; entering a
//! level pushes a copy of the pointer and exiting pops it, which restores the
//! parent's active set (as a set — the order inside the range may have been
//! permuted by the child's swaps). No operation allocates.

use crate::graph::VertexId;

/// Which way the active set moves as the search descends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Active set shrinks with depth (`P`, `L`); the root level is full.
    Shrinking,
    /// Active set grows with depth (`R`); the root level is empty.
    Growing,
}

pub struct CompactArray {
    values: Vec<VertexId>,
    /// positions[values[i]] == i; the lookup table making `contains` O(1).
    positions: Vec<u32>,
    level_ptrs: Vec<u32>,
    direction: Direction,
}

impl CompactArray {
    pub fn new(universe_size: usize, direction: Direction) -> CompactArray {
        let root = match direction {
            Direction::Shrinking => universe_size as u32,
            Direction::Growing => 0,
        };
        CompactArray {
            values: (0..universe_size as VertexId).collect(),
            positions: (0..universe_size as u32).collect(),
            level_ptrs: vec![root],
            direction,
        }
    }

    pub fn universe_size(&self) -> usize {
        self.values.len()
    }

    /// Number of active vertices at the current level.
    pub fn len(&self) -> usize {
        *self.level_ptrs.last().unwrap() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of level pointers on the stack (root level = 1).
    pub fn depth(&self) -> usize {
        self.level_ptrs.len()
    }

    /// The active vertices, in arbitrary order.
    pub fn active(&self) -> &[VertexId] {
        &self.values[..self.len()]
    }

    /// O(1) membership test against the current level.
    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.positions[v as usize] < *self.level_ptrs.last().unwrap()
    }

    #[inline]
    fn swap_slots(&mut self, i: u32, j: u32) {
        if i == j {
            return;
        }
        self.values.swap(i as usize, j as usize);
        self.positions[self.values[i as usize] as usize] = i;
        self.positions[self.values[j as usize] as usize] = j;
    }

    /// Removes an active vertex by swapping it with the last active element
    /// and decrementing the level pointer. The vertex must be active.
    pub fn remove_active(&mut self, v: VertexId) {
        debug_assert_eq!(self.direction, Direction::Shrinking);
        assert!(self.contains(v), "remove_active: vertex {v} is not active");
        let last = *self.level_ptrs.last().unwrap() - 1;
        self.swap_slots(self.positions[v as usize], last);
        *self.level_ptrs.last_mut().unwrap() = last;
    }

    /// Activates a vertex by swapping it to the boundary index and
    /// incrementing the level pointer. The vertex must be inactive.
    pub fn add_active(&mut self, v: VertexId) {
        debug_assert_eq!(self.direction, Direction::Growing);
        assert!(!self.contains(v), "add_active: vertex {v} is already active");
        let boundary = *self.level_ptrs.last().unwrap();
        self.swap_slots(self.positions[v as usize], boundary);
        *self.level_ptrs.last_mut().unwrap() = boundary + 1;
    }

    /// Pushes a copy of the current boundary; subsequent removals or
    /// additions affect only the new level.
    pub fn enter_level(&mut self) {
        let top = *self.level_ptrs.last().unwrap();
        self.level_ptrs.push(top);
    }

    /// Pops the top boundary, restoring the parent's active set.
    pub fn exit_level(&mut self) {
        assert!(
            self.level_ptrs.len() >= 2,
            "exit_level: cannot pop the root pointer"
        );
        self.level_ptrs.pop();
    }

    /// Shrinks the current level to exactly the active members of `hits`
    /// (inactive hits are skipped; duplicates among active hits are not
    /// allowed). Returns the retained count. Swaps stay within the previous
    /// active range, so outer levels keep their sets.
    pub fn retain_active(&mut self, hits: impl IntoIterator<Item = VertexId>) -> usize {
        debug_assert_eq!(self.direction, Direction::Shrinking);
        let mut front = 0u32;
        for v in hits {
            if self.contains(v) {
                let at = self.positions[v as usize];
                debug_assert!(at >= front, "retain_active: duplicate hit {v}");
                self.swap_slots(at, front);
                front += 1;
            }
        }
        *self.level_ptrs.last_mut().unwrap() = front;
        front as usize
    }

    /// Empties the current level without touching the permutation.
    pub fn clear_active(&mut self) {
        debug_assert_eq!(self.direction, Direction::Shrinking);
        *self.level_ptrs.last_mut().unwrap() = 0;
    }

    /// Resets to a single root level whose active set is exactly `members`
    /// (which must be distinct). Used when a worker loads a new task.
    pub fn reset_active(&mut self, members: impl IntoIterator<Item = VertexId>) {
        self.level_ptrs.clear();
        self.level_ptrs.push(self.values.len() as u32);
        let mut front = 0u32;
        for v in members {
            let at = self.positions[v as usize];
            debug_assert!(at >= front, "reset_active: duplicate member {v}");
            self.swap_slots(at, front);
            front += 1;
        }
        self.level_ptrs[0] = front;
    }

    /// Resets to a single root level with the whole universe active.
    pub fn reset_full(&mut self) {
        self.level_ptrs.clear();
        self.level_ptrs.push(self.values.len() as u32);
    }

    /// Checks permutation/lookup consistency and pointer monotonicity.
    /// Intended for debug assertions and property tests.
    pub fn validate(&self) -> Result<(), String> {
        for (i, &v) in self.values.iter().enumerate() {
            if self.positions[v as usize] != i as u32 {
                return Err(format!("positions[values[{i}]] != {i}"));
            }
        }
        let mut seen = vec![false; self.values.len()];
        for &v in &self.values {
            if seen[v as usize] {
                return Err(format!("value {v} appears twice"));
            }
            seen[v as usize] = true;
        }
        let monotone = match self.direction {
            Direction::Shrinking => self.level_ptrs.windows(2).all(|w| w[0] >= w[1]),
            Direction::Growing => self.level_ptrs.windows(2).all(|w| w[0] <= w[1]),
        };
        if !monotone {
            return Err(format!("level pointers not monotone: {:?}", self.level_ptrs));
        }
        Ok(())
    }
}
