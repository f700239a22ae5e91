//! Token-level LCS alignment (Myers' O((N+M)D) algorithm) and the two
//! change representations derived from it.

use serde::{Deserialize, Serialize};

/// One stretch of an alignment between an old and a new sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Run {
    Equal { old: usize, new: usize, len: usize },
    Delete { old: usize, len: usize },
    Insert { new: usize, len: usize },
}

/// Aligns `old` against `new` along a longest common subsequence.
///
/// Between two `Equal` runs there is at most one `Delete` followed by at
/// most one `Insert`.
pub fn align<T: PartialEq>(old: &[T], new: &[T]) -> Vec<Run> {
    let prefix = old.iter().zip(new).take_while(|(a, b)| a == b).count();
    let suffix = old[prefix..]
        .iter()
        .rev()
        .zip(new[prefix..].iter().rev())
        .take_while(|(a, b)| a == b)
        .count();
    let a = &old[prefix..old.len() - suffix];
    let b = &new[prefix..new.len() - suffix];

    let mut builder = RunBuilder::default();
    builder.equal(0, 0, prefix);
    for step in myers(a, b) {
        match step {
            Step::Equal(x, y) => builder.equal(prefix + x, prefix + y, 1),
            Step::Delete(x) => builder.delete(prefix + x),
            Step::Insert(y) => builder.insert(prefix + y),
        }
    }
    builder.equal(old.len() - suffix, new.len() - suffix, suffix);
    builder.finish()
}

/// Length of a longest common subsequence.
pub fn lcs_len<T: PartialEq>(old: &[T], new: &[T]) -> usize {
    align(old, new)
        .iter()
        .map(|r| match r {
            Run::Equal { len, .. } => *len,
            _ => 0,
        })
        .sum()
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Equal(usize, usize),
    Delete(usize),
    Insert(usize),
}

/// Shortest edit path, in forward order.
fn myers<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Step> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max = n + m;
    if max == 0 {
        return Vec::new();
    }
    let offset = max + 1;
    let mut v = vec![0isize; (2 * max + 3) as usize];
    // trace[d] holds v[-(d+1)..=d+1] as it stood before round d.
    let mut trace: Vec<Vec<isize>> = Vec::new();

    'outer: for d in 0..=max {
        let lo = (offset - d - 1) as usize;
        let hi = (offset + d + 1) as usize;
        trace.push(v[lo..=hi].to_vec());
        let mut k = -d;
        while k <= d {
            let idx = (offset + k) as usize;
            let mut x = if k == -d || (k != d && v[idx - 1] < v[idx + 1]) {
                v[idx + 1]
            } else {
                v[idx - 1] + 1
            };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            v[idx] = x;
            if x >= n && y >= m {
                break 'outer;
            }
            k += 2;
        }
    }

    let mut steps = Vec::with_capacity((n + m) as usize);
    let (mut x, mut y) = (n, m);
    for (d, snapshot) in trace.iter().enumerate().rev() {
        let d = d as isize;
        let at = |k: isize| snapshot[(k + d + 1) as usize];
        let k = x - y;
        let prev_k = if k == -d || (k != d && at(k - 1) < at(k + 1)) {
            k + 1
        } else {
            k - 1
        };
        let prev_x = at(prev_k);
        let prev_y = prev_x - prev_k;
        while x > prev_x && y > prev_y {
            x -= 1;
            y -= 1;
            steps.push(Step::Equal(x as usize, y as usize));
        }
        if d > 0 {
            if x == prev_x {
                steps.push(Step::Insert(prev_y as usize));
            } else {
                steps.push(Step::Delete(prev_x as usize));
            }
        }
        x = prev_x;
        y = prev_y;
    }
    steps.reverse();
    steps
}

#[derive(Default)]
struct RunBuilder {
    runs: Vec<Run>,
    // pending change region: (old start, old len, new start, new len)
    pending: Option<(usize, usize, usize, usize)>,
}

impl RunBuilder {
    fn equal(&mut self, old: usize, new: usize, len: usize) {
        if len == 0 {
            return;
        }
        self.flush();
        if let Some(Run::Equal {
            old: o,
            new: n,
            len: l,
        }) = self.runs.last_mut()
        {
            if *o + *l == old && *n + *l == new {
                *l += len;
                return;
            }
        }
        self.runs.push(Run::Equal { old, new, len });
    }

    fn delete(&mut self, old: usize) {
        match &mut self.pending {
            Some((os, dl, _, _)) => {
                if *dl == 0 {
                    *os = old;
                }
                *dl += 1;
            }
            None => self.pending = Some((old, 1, usize::MAX, 0)),
        }
    }

    fn insert(&mut self, new: usize) {
        match &mut self.pending {
            Some((_, _, ns, nl)) => {
                if *nl == 0 {
                    *ns = new;
                }
                *nl += 1;
            }
            None => self.pending = Some((usize::MAX, 0, new, 1)),
        }
    }

    fn flush(&mut self) {
        if let Some((os, ol, ns, nl)) = self.pending.take() {
            if ol > 0 {
                self.runs.push(Run::Delete { old: os, len: ol });
            }
            if nl > 0 {
                self.runs.push(Run::Insert { new: ns, len: nl });
            }
        }
    }

    fn finish(mut self) -> Vec<Run> {
        self.flush();
        self.runs
    }
}

/// One step of an edit script. Positions refer to the sequence as it
/// stands when the op applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditOp<T> {
    Insert { pos: usize, tokens: Vec<T> },
    Delete { pos: usize, len: usize },
}

/// Edit script turning `old` into `new`; a replaced stretch is recorded as
/// a delete followed by an insert.
pub fn edit_script<T: PartialEq + Clone>(old: &[T], new: &[T]) -> Vec<EditOp<T>> {
    let mut ops = Vec::new();
    let mut cursor = 0;
    for run in align(old, new) {
        match run {
            Run::Equal { len, .. } => cursor += len,
            Run::Delete { len, .. } => ops.push(EditOp::Delete { pos: cursor, len }),
            Run::Insert { new: at, len } => {
                ops.push(EditOp::Insert {
                    pos: cursor,
                    tokens: new[at..at + len].to_vec(),
                });
                cursor += len;
            }
        }
    }
    ops
}

/// Applies `ops` in order, failing on the first out-of-range position.
pub fn apply_script<T: Clone>(seq: &mut Vec<T>, ops: &[EditOp<T>]) -> Result<(), String> {
    for (i, op) in ops.iter().enumerate() {
        match op {
            EditOp::Insert { pos, tokens } => {
                if *pos > seq.len() {
                    return Err(format!("op {i}: insert at {pos} past end {}", seq.len()));
                }
                seq.splice(*pos..*pos, tokens.iter().cloned());
            }
            EditOp::Delete { pos, len } => {
                if pos + len > seq.len() {
                    return Err(format!(
                        "op {i}: delete {pos}+{len} past end {}",
                        seq.len()
                    ));
                }
                seq.drain(*pos..pos + len);
            }
        }
    }
    Ok(())
}

/// A piece of a reference record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Segment<T> {
    /// `len` tokens of version `source` starting at `start`.
    Copy { source: u32, start: usize, len: usize },
    Literal(Vec<T>),
}

/// Reference segments describing `new` in terms of `old`, which is version
/// `source`.
pub fn reference_segments<T: PartialEq + Clone>(
    old: &[T],
    new: &[T],
    source: u32,
) -> Vec<Segment<T>> {
    align(old, new)
        .into_iter()
        .filter_map(|run| match run {
            Run::Equal { old: start, len, .. } => Some(Segment::Copy { source, start, len }),
            Run::Insert { new: at, len } => Some(Segment::Literal(new[at..at + len].to_vec())),
            Run::Delete { .. } => None,
        })
        .collect()
}
