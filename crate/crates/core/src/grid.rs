//! OFDM time-frequency lattice and the link configuration.
//!
//! Storage is time-major: cell `(t, k)` lives at `t * num_subcarriers + k`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::constellation::Modulation;

/// Global link parameters shared by every module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// FFT size N.
    pub num_subcarriers: usize,
    /// Cyclic prefix length in samples.
    pub cp_length: usize,
    /// Subcarrier bandwidth in Hz.
    pub subcarrier_bandwidth: f64,
    /// Baseband sample period in seconds (the unit of tap delays).
    pub symbol_time: f64,
    #[serde(rename = "modulation_order")]
    pub modulation: Modulation,
    /// n: OFDM symbols between soundings in pattern 1.
    pub base_pilot_period: usize,
    /// L: pilot cells per sounding.
    pub pilots_per_sounding: usize,
    /// Subcarriers between pilot tones (1 = block-type).
    pub pilot_subcarrier_spacing: usize,
    pub snr_db: f64,
    /// Threshold bit error probability P_e,th.
    pub ber_threshold: f64,
    /// Length of the sliding BER window, in bits.
    pub ber_window: usize,
    /// Symbols of latency on the feedback channel.
    pub feedback_delay: usize,
    pub rng_seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        let n = 64;
        let df = 15e3;
        LinkConfig {
            num_subcarriers: n,
            cp_length: 8,
            subcarrier_bandwidth: df,
            symbol_time: 1.0 / (n as f64 * df),
            modulation: Modulation::Qpsk,
            base_pilot_period: 1,
            pilots_per_sounding: n,
            pilot_subcarrier_spacing: 1,
            snr_db: 20.0,
            ber_threshold: 1e-2,
            ber_window: 10_000,
            feedback_delay: 0,
            rng_seed: 1,
        }
    }
}

impl LinkConfig {
    pub fn samples_per_symbol(&self) -> usize {
        self.num_subcarriers + self.cp_length
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    /// Checks the invariants that do not depend on the channel profile.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_subcarriers;
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "num_subcarriers must be a power of two >= 8, got {n}"
            )));
        }
        if !(self.ber_threshold > 0.0 && self.ber_threshold < 0.5) {
            return Err(Error::config(format!(
                "ber_threshold must lie in (0, 0.5), got {}",
                self.ber_threshold
            )));
        }
        if self.base_pilot_period == 0 {
            return Err(Error::config("base_pilot_period must be >= 1"));
        }
        if self.pilots_per_sounding == 0 {
            return Err(Error::config("pilots_per_sounding must be >= 1"));
        }
        if self.pilot_subcarrier_spacing == 0 || self.pilot_subcarrier_spacing > n {
            return Err(Error::config(format!(
                "pilot_subcarrier_spacing must be in 1..={n}"
            )));
        }
        if self.ber_window == 0 {
            return Err(Error::config("ber_window must be >= 1 bit"));
        }
        if !(self.subcarrier_bandwidth > 0.0) {
            return Err(Error::config("subcarrier_bandwidth must be positive"));
        }
        if !(self.symbol_time > 0.0) {
            return Err(Error::NonPositiveSymbolTime(self.symbol_time));
        }
        if self.snr_db.is_nan() {
            return Err(Error::config("snr_db is NaN"));
        }
        Ok(())
    }

    /// The known pilot value for each subcarrier.
    pub fn pilot_sequence(&self) -> Vec<Complex64> {
        pilot_sequence(self.num_subcarriers, self.rng_seed)
    }
}

/// Unit-magnitude QPSK pilot values, one per subcarrier, derived from `seed`.
///
/// The same sequence is transmitted at every sounding so that consecutive
/// pilot observations differ only through the channel and noise.
pub fn pilot_sequence(num_subcarriers: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x0050_494c_4f54);
    (0..num_subcarriers)
        .map(|_| {
            let q: u8 = rng.random_range(0..4);
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * f64::from(2 * q + 1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellRole {
    Data,
    Pilot,
    Null,
}

impl CellRole {
    pub fn as_str(self) -> &'static str {
        match self {
            CellRole::Data => "data",
            CellRole::Pilot => "pilot",
            CellRole::Null => "null",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotArrangement {
    /// Whole OFDM symbols of pilots, repeated in time.
    BlockType,
    /// Pilot tones on a comb of subcarriers in every symbol.
    CombType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PilotLayout {
    pub arrangement: PilotArrangement,
    pub time_period: usize,
    pub freq_spacing: usize,
}

impl PilotLayout {
    pub fn block(time_period: usize) -> Self {
        PilotLayout {
            arrangement: PilotArrangement::BlockType,
            time_period,
            freq_spacing: 1,
        }
    }

    pub fn comb(freq_spacing: usize) -> Self {
        PilotLayout {
            arrangement: PilotArrangement::CombType,
            time_period: 1,
            freq_spacing,
        }
    }

    pub fn validate(&self, num_subcarriers: usize) -> Result<()> {
        if self.time_period == 0 || self.freq_spacing == 0 {
            return Err(Error::LayoutInvalid(
                "time_period and freq_spacing must be >= 1".into(),
            ));
        }
        match self.arrangement {
            PilotArrangement::BlockType if self.freq_spacing != 1 => Err(Error::LayoutInvalid(
                format!("block-type layout needs freq_spacing 1, got {}", self.freq_spacing),
            )),
            PilotArrangement::CombType if self.time_period != 1 => Err(Error::LayoutInvalid(
                format!("comb-type layout needs time_period 1, got {}", self.time_period),
            )),
            PilotArrangement::CombType if self.freq_spacing > num_subcarriers => {
                Err(Error::LayoutInvalid(format!(
                    "comb spacing {} exceeds {num_subcarriers} subcarriers",
                    self.freq_spacing
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn is_pilot(&self, t: usize, k: usize) -> bool {
        t % self.time_period == 0 && k % self.freq_spacing == 0
    }

    /// Pilot subcarriers in symbol `t` (empty for non-pilot symbols).
    pub fn pilot_indices(&self, t: usize, num_subcarriers: usize) -> Vec<usize> {
        if t % self.time_period != 0 {
            return Vec::new();
        }
        (0..num_subcarriers).step_by(self.freq_spacing).collect()
    }
}

/// Complex symbols on the time-frequency lattice with a role tag per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmGrid {
    num_symbols: usize,
    num_subcarriers: usize,
    symbols: Vec<Complex64>,
    roles: Vec<CellRole>,
}

impl OfdmGrid {
    pub fn from_parts(
        num_symbols: usize,
        num_subcarriers: usize,
        symbols: Vec<Complex64>,
        roles: Vec<CellRole>,
    ) -> Result<Self> {
        let cells = num_symbols * num_subcarriers;
        if symbols.len() != cells {
            return Err(Error::LengthMismatch {
                expected: cells,
                actual: symbols.len(),
            });
        }
        if roles.len() != cells {
            return Err(Error::LengthMismatch {
                expected: cells,
                actual: roles.len(),
            });
        }
        Ok(OfdmGrid {
            num_symbols,
            num_subcarriers,
            symbols,
            roles,
        })
    }

    /// All-zero, all-Data grid.
    pub fn zeros(num_symbols: usize, num_subcarriers: usize) -> Self {
        let cells = num_symbols * num_subcarriers;
        OfdmGrid {
            num_symbols,
            num_subcarriers,
            symbols: vec![Complex64::new(0.0, 0.0); cells],
            roles: vec![CellRole::Data; cells],
        }
    }

    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn roles(&self) -> &[CellRole] {
        &self.roles
    }

    pub fn get(&self, t: usize, k: usize) -> Complex64 {
        self.symbols[t * self.num_subcarriers + k]
    }

    pub fn set(&mut self, t: usize, k: usize, value: Complex64) {
        self.symbols[t * self.num_subcarriers + k] = value;
    }

    pub fn role(&self, t: usize, k: usize) -> CellRole {
        self.roles[t * self.num_subcarriers + k]
    }

    pub fn set_role(&mut self, t: usize, k: usize, role: CellRole) {
        self.roles[t * self.num_subcarriers + k] = role;
    }

    pub fn row(&self, t: usize) -> &[Complex64] {
        let n = self.num_subcarriers;
        &self.symbols[t * n..(t + 1) * n]
    }

    pub fn role_row(&self, t: usize) -> &[CellRole] {
        let n = self.num_subcarriers;
        &self.roles[t * n..(t + 1) * n]
    }

    pub fn count(&self, role: CellRole) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    /// Writes the debug dump: `t,k,role,re,im`, one line per cell.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_io = |e: csv::Error| Error::io("<grid dump>", std::io::Error::other(e));
        w.write_record(["t", "k", "role", "re", "im"]).map_err(to_io)?;
        for t in 0..self.num_symbols {
            for k in 0..self.num_subcarriers {
                let v = self.get(t, k);
                w.write_record([
                    t.to_string(),
                    k.to_string(),
                    self.role(t, k).as_str().to_string(),
                    v.re.to_string(),
                    v.im.to_string(),
                ])
                .map_err(to_io)?;
            }
        }
        w.flush().map_err(|e| Error::io("<grid dump>", e))
    }
}

/// Lays out pilots per `layout` and fills Data cells from `data_bits`.
///
/// Returns the grid and the unused tail of `data_bits`.
pub fn build_grid<'a>(
    config: &LinkConfig,
    layout: &PilotLayout,
    num_symbols: usize,
    data_bits: &'a [u8],
) -> Result<(OfdmGrid, &'a [u8])> {
    let n = config.num_subcarriers;
    layout.validate(n)?;
    let pilots = config.pilot_sequence();
    let bps = config.bits_per_symbol();

    let data_cells = (0..num_symbols)
        .map(|t| (0..n).filter(|&k| !layout.is_pilot(t, k)).count())
        .sum::<usize>();
    let needed = data_cells * bps;
    if data_bits.len() < needed {
        return Err(Error::InsufficientBits {
            needed,
            available: data_bits.len(),
        });
    }

    let mut grid = OfdmGrid::zeros(num_symbols, n);
    let mut bits = data_bits.chunks_exact(bps);
    for t in 0..num_symbols {
        for k in 0..n {
            if layout.is_pilot(t, k) {
                grid.set_role(t, k, CellRole::Pilot);
                grid.set(t, k, pilots[k]);
            } else {
                // length checked above
                let chunk = bits.next().expect("bit stream checked");
                grid.set(t, k, config.modulation.map(chunk));
            }
        }
    }
    Ok((grid, &data_bits[needed..]))
}

/// Fraction of non-null cells that carry data.
pub fn data_rate_fraction(grid: &OfdmGrid) -> f64 {
    let data = grid.count(CellRole::Data);
    let pilot = grid.count(CellRole::Pilot);
    if data + pilot == 0 {
        return 0.0;
    }
    data as f64 / (data + pilot) as f64
}
