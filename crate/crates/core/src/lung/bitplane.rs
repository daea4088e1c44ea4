//! Bit-packed binary image used by the morphology kernels: 64 pixels per
//! word, rows padded to whole words with the padding kept at zero.

use super::BinaryMask;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitPlane {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitPlane {
    pub(crate) fn from_fn(rows: usize, cols: usize, f: impl Fn(usize) -> bool) -> Self {
        let words = cols.div_ceil(64);
        let mut bits = Vec::with_capacity(rows * words);
        for r in 0..rows {
            for k in 0..words {
                let lo = k * 64;
                let hi = (lo + 64).min(cols);
                let mut word = 0u64;
                for c in lo..hi {
                    word |= (f(r * cols + c) as u64) << (c - lo);
                }
                bits.push(word);
            }
        }
        BitPlane {
            rows,
            cols,
            words,
            bits,
        }
    }

    pub(crate) fn from_mask(mask: &BinaryMask) -> Self {
        let src = mask.as_slice();
        Self::from_fn(mask.rows(), mask.cols(), |i| src[i])
    }

    pub(crate) fn to_mask(&self) -> BinaryMask {
        let mut data = Vec::with_capacity(self.rows * self.cols);
        if self.words == 0 {
            return BinaryMask::new(self.rows, self.cols);
        }
        for row in self.bits.chunks_exact(self.words) {
            for c in 0..self.cols {
                data.push(row[c / 64] >> (c % 64) & 1 == 1);
            }
        }
        BinaryMask::from_vec(self.rows, self.cols, data)
    }

    fn empty_like(&self) -> Self {
        BitPlane {
            bits: vec![0; self.bits.len()],
            ..*self
        }
    }

    fn tail_mask(&self) -> u64 {
        match self.cols % 64 {
            0 => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }

    pub(crate) fn any(&self) -> bool {
        self.bits.iter().any(|&w| w != 0)
    }

    /// Complement with the padding bits cleared again.
    pub(crate) fn inverted(mut self) -> Self {
        let tail = self.tail_mask();
        let words = self.words;
        for (i, w) in self.bits.iter_mut().enumerate() {
            *w = !*w;
            if i % words == words - 1 {
                *w &= tail;
            }
        }
        self
    }

    /// `out |= (src shifted by d columns)` in both directions, per row.
    fn or_shifted(&self, src: &[u64], out: &mut [u64], d: usize) {
        let n = self.words;
        if n == 0 {
            return;
        }
        let (q, s) = (d / 64, d % 64);
        for r in 0..self.rows {
            let row = &src[r * n..(r + 1) * n];
            let dst = &mut out[r * n..(r + 1) * n];
            for k in 0..n {
                // Pixel c takes c + d (from higher words) and c - d (from lower).
                let hi = |j: usize| row.get(j).copied().unwrap_or(0);
                let from_right = if s == 0 {
                    hi(k + q)
                } else {
                    (hi(k + q) >> s) | (hi(k + q + 1) << (64 - s))
                };
                let from_left = if k < q {
                    0
                } else if s == 0 {
                    row[k - q]
                } else {
                    (row[k - q] << s) | if k > q { row[k - q - 1] >> (64 - s) } else { 0 }
                };
                dst[k] |= from_right | from_left;
            }
        }
        let tail = self.tail_mask();
        for r in 0..self.rows {
            out[r * n + n - 1] &= tail;
        }
    }

    /// Dilation by the disk whose run half-width at row offset
    /// `i - radius` is `widths[i]`.
    pub(crate) fn dilate(&self, widths: &[usize]) -> Self {
        let radius = widths.len() / 2;
        let max_w = widths.iter().copied().max().unwrap_or(0);
        // Horizontal dilations by 0..=max_w, built incrementally.
        let mut horizontal: Vec<Vec<u64>> = Vec::with_capacity(max_w + 1);
        horizontal.push(self.bits.clone());
        for w in 1..=max_w {
            let mut next = horizontal[w - 1].clone();
            self.or_shifted(&self.bits, &mut next, w);
            horizontal.push(next);
        }

        let mut out = self.empty_like();
        let n = self.words;
        for (i, &w) in widths.iter().enumerate() {
            let run = &horizontal[w];
            for y in 0..self.rows {
                let sy = y as isize + i as isize - radius as isize;
                if sy < 0 || sy >= self.rows as isize {
                    continue;
                }
                let sy = sy as usize;
                for (d, s) in out.bits[y * n..(y + 1) * n]
                    .iter_mut()
                    .zip(&run[sy * n..(sy + 1) * n])
                {
                    *d |= s;
                }
            }
        }
        out
    }

    pub(crate) fn erode(&self, widths: &[usize]) -> Self {
        self.clone().inverted().dilate(widths).inverted()
    }
}
