/// A row-major boolean grid.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, false)
    }

    pub fn filled(rows: usize, cols: usize, value: bool) -> Self {
        BinaryMask {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<bool>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "mask data does not match {rows}x{cols}"
        );
        BinaryMask { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        BinaryMask { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [bool] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    pub fn all(&self) -> bool {
        self.data.iter().all(|&b| b)
    }

    /// True when every foreground pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn invert(&mut self) {
        for v in &mut self.data {
            *v = !*v;
        }
    }
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.rows <= 32 && self.cols <= 64 {
            writeln!(f, "BinaryMask {}x{}", self.rows, self.cols)?;
            for r in 0..self.rows {
                let line: String = (0..self.cols)
                    .map(|c| if self.get(r, c) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{line}")?;
            }
            Ok(())
        } else {
            write!(
                f,
                "BinaryMask {}x{} ({} set)",
                self.rows,
                self.cols,
                self.count()
            )
        }
    }
}
