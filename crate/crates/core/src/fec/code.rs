use super::FecError;

pub const CODE_N: usize = 128;
pub const CODE_K: usize = 119;
pub const PARITY_ROWS: usize = 9;
/// Largest supported Chase-I budget (2^q test patterns).
pub const MAX_CHASE_Q: usize = 16;

const INFO_MASK: u128 = (1u128 << CODE_K) - 1;

/// Outcome of syndrome decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Ok,
    Corrected,
    /// Non-zero syndrome that matches no single-bit error; the word is
    /// returned unchanged.
    Detected,
}

/// The (128,119) code in systematic form: positions `0..119` carry the
/// information bits and `119..128` the parity bits.
///
/// Every column of the 9x128 parity-check matrix has odd weight and no two
/// columns coincide, so `d_min >= 4`. Rows 1-7 are the columns of a
/// shortened (127,120) Hamming code (all non-zero 7-bit vectors except
/// `1111111`), row 8 is an overall parity row and row 9 carries the parity
/// of rows 1-7. The last two columns are the unit vectors of rows 8 and 9.
#[derive(Debug, Clone)]
pub struct HammingCode {
    columns: [u16; CODE_N],
    rows: [u128; PARITY_ROWS],
    /// Parity bits (as a 9-bit word) that cancel a given syndrome.
    encoder: [u16; 1 << PARITY_ROWS],
    /// Error position for each syndrome, `u8::MAX` if none.
    locator: [u8; 1 << PARITY_ROWS],
}

impl Default for HammingCode {
    fn default() -> Self {
        Self::new()
    }
}

fn parity_column(v: u16) -> u16 {
    let p = (v.count_ones() & 1) as u16;
    v | (1 << 7) | (p << 8)
}

impl HammingCode {
    pub fn new() -> Self {
        let mut columns = [0u16; CODE_N];
        let info = (1u16..127).filter(|v| !v.is_power_of_two());
        for (j, v) in info.enumerate() {
            columns[j] = parity_column(v);
        }
        for i in 0..7 {
            columns[CODE_K + i] = parity_column(1 << i);
        }
        columns[CODE_N - 2] = 1 << 7;
        columns[CODE_N - 1] = 1 << 8;

        let mut rows = [0u128; PARITY_ROWS];
        for (j, &col) in columns.iter().enumerate() {
            for (r, row) in rows.iter_mut().enumerate() {
                if col >> r & 1 == 1 {
                    *row |= 1 << j;
                }
            }
        }

        let mut encoder = [u16::MAX; 1 << PARITY_ROWS];
        for p in 0u16..(1 << PARITY_ROWS) {
            let s = (0..PARITY_ROWS)
                .filter(|&i| p >> i & 1 == 1)
                .fold(0u16, |acc, i| acc ^ columns[CODE_K + i]);
            encoder[s as usize] = p;
        }
        assert!(encoder.iter().all(|&p| p != u16::MAX), "parity columns must be a basis");

        let mut locator = [u8::MAX; 1 << PARITY_ROWS];
        for (j, &col) in columns.iter().enumerate() {
            locator[col as usize] = j as u8;
        }
        Self {
            columns,
            rows,
            encoder,
            locator,
        }
    }

    pub fn rate(&self) -> f64 {
        CODE_K as f64 / CODE_N as f64
    }

    /// Column `j` of the parity-check matrix, row `r` in bit `r`.
    pub fn column(&self, j: usize) -> u16 {
        self.columns[j]
    }

    /// Rows of the parity-check matrix, position `j` in bit `j`.
    pub fn parity_check(&self) -> [u128; PARITY_ROWS] {
        self.rows
    }

    /// Rank of the parity-check matrix over GF(2).
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.to_vec();
        let mut rank = 0;
        for bit in 0..CODE_N {
            let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
                continue;
            };
            rows.swap(rank, p);
            for i in 0..rows.len() {
                if i != rank && rows[i] >> bit & 1 == 1 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }

    /// Generator matrix rows: the codewords of the 119 unit information words.
    pub fn generator(&self) -> Vec<u128> {
        (0..CODE_K).map(|i| self.encode_word(1 << i)).collect()
    }

    pub fn syndrome(&self, word: u128) -> u16 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |s, (r, &row)| s | (((word & row).count_ones() & 1) as u16) << r)
    }

    /// Systematic codeword of the low 119 bits of `info`.
    pub fn encode_word(&self, info: u128) -> u128 {
        let info = info & INFO_MASK;
        let p = self.encoder[self.syndrome(info) as usize];
        info | (p as u128) << CODE_K
    }

    /// Syndrome decoding to the nearest codeword at distance <= 1.
    pub fn decode_word(&self, word: u128) -> (u128, DecodeStatus) {
        let s = self.syndrome(word);
        if s == 0 {
            return (word, DecodeStatus::Ok);
        }
        match self.locator[s as usize] {
            u8::MAX => (word, DecodeStatus::Detected),
            j => (word ^ 1 << j, DecodeStatus::Corrected),
        }
    }

    /// Chase-I decoding of one block of 128 LLRs (positive favours bit 1).
    /// Returns the selected codeword.
    pub fn chase_word(&self, llrs: &[f64], q: usize) -> u128 {
        debug_assert_eq!(llrs.len(), CODE_N);
        let mut hard = 0u128;
        for (j, &l) in llrs.iter().enumerate() {
            if l > 0.0 {
                hard |= 1 << j;
            }
        }
        let (fallback, status) = self.decode_word(hard);
        if q == 0 {
            return fallback;
        }
        let mut order: Vec<usize> = (0..CODE_N).collect();
        order.sort_by(|&a, &b| llrs[a].abs().total_cmp(&llrs[b].abs()).then(a.cmp(&b)));
        let weak = &order[..q];

        let metric = |c: u128| {
            let mut diff = c ^ hard;
            let mut m = 0.0;
            while diff != 0 {
                let j = diff.trailing_zeros() as usize;
                m += llrs[j].abs();
                diff &= diff - 1;
            }
            m
        };
        let mut best = (status != DecodeStatus::Detected).then(|| (metric(fallback), fallback));
        for pattern in 1u32..(1 << q) {
            let mut test = hard;
            for (i, &j) in weak.iter().enumerate() {
                if pattern >> i & 1 == 1 {
                    test ^= 1 << j;
                }
            }
            let (cand, st) = self.decode_word(test);
            if st == DecodeStatus::Detected {
                continue;
            }
            let m = metric(cand);
            if best.is_none_or(|(bm, _)| m < bm) {
                best = Some((m, cand));
            }
        }
        best.map_or(fallback, |(_, c)| c)
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, FecError> {
        let w = pack(info, CODE_K)?;
        Ok(unpack(self.encode_word(w), CODE_N))
    }

    pub fn decode_hd(&self, word: &[u8]) -> Result<(Vec<u8>, DecodeStatus), FecError> {
        let (c, status) = self.decode_word(pack(word, CODE_N)?);
        Ok((unpack(c, CODE_K), status))
    }

    pub fn decode_chase1(&self, llrs: &[f64], q: usize) -> Result<Vec<u8>, FecError> {
        if llrs.len() != CODE_N {
            return Err(FecError::LengthMismatch {
                expected: CODE_N,
                got: llrs.len(),
            });
        }
        if q > MAX_CHASE_Q {
            return Err(FecError::InvalidBudget(q));
        }
        Ok(unpack(self.chase_word(llrs, q), CODE_K))
    }
}

fn pack(bits: &[u8], len: usize) -> Result<u128, FecError> {
    if bits.len() != len {
        return Err(FecError::LengthMismatch {
            expected: len,
            got: bits.len(),
        });
    }
    bits.iter().enumerate().try_fold(0u128, |w, (j, &b)| match b {
        0 => Ok(w),
        1 => Ok(w | 1 << j),
        other => Err(FecError::NotBinary(other)),
    })
}

fn unpack(word: u128, len: usize) -> Vec<u8> {
    (0..len).map(|j| (word >> j & 1) as u8).collect()
}
