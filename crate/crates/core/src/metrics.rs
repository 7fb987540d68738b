//! Static power and area accounting.
//!
//! Figures are entered as decimal strings and kept as exact rationals, so
//! totals and shares carry no rounding until they are printed.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::Error;

pub type Exact = Ratio<i128>;

/// Parses a plain decimal such as `"11.2"` or `"2e9"` into an exact rational.
pub fn exact(text: &str) -> Result<Exact, Error> {
    let bad = || Error::InvalidInput(format!("not a decimal number: {text:?}"));
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], i32::from_str(&t[i + 1..]).map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
        || exp.unsigned_abs() > 30
    {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer = i128::from_str(&all).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = |n: u32| 10i128.checked_pow(n).ok_or_else(bad);
    let mut r = if scale >= 0 {
        Exact::from_integer(numer.checked_mul(ten(scale as u32)?).ok_or_else(bad)?)
    } else {
        Exact::new(numer, ten(scale.unsigned_abs())?)
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Decimal rendering: exact when the expansion ends within `max_places`,
/// otherwise rounded half away from zero to `max_places`.
pub fn fmt_exact(r: &Exact, max_places: u32) -> String {
    let neg = *r < Exact::from_integer(0);
    let a = if neg { -*r } else { *r };
    let scale = 10i128.pow(max_places);
    let scaled = a * Exact::from_integer(scale);
    let rounded = (scaled + Exact::new(1, 2)).floor().to_integer();
    let places = (0..=max_places)
        .find(|&p| (a * Exact::from_integer(10i128.pow(p))).is_integer())
        .unwrap_or(max_places);
    let value = rounded / 10i128.pow(max_places - places);
    let int = value / 10i128.pow(places);
    let frac = value % 10i128.pow(places);
    let sign = if neg && value != 0 { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac:0width$}", width = places as usize)
    }
}

const PLACES: u32 = 6;

/// Per-block power in milliwatts, with supply and bitrate.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget {
    pub serializer_mw: Exact,
    pub deserializer_mw: Exact,
    pub cdr_mw: Exact,
    pub tx_mw: Exact,
    pub rx_mw: Exact,
    pub supply_v: Exact,
    pub bitrate: Exact,
}

impl PowerBudget {
    /// Reported post-layout figures for the 2 Gbps, 1.8 V design.
    pub fn reference() -> Self {
        Self {
            serializer_mw: Exact::from_integer(235),
            deserializer_mw: Exact::from_integer(128),
            cdr_mw: Exact::from_integer(59),
            tx_mw: Exact::new(45, 10),
            rx_mw: Exact::new(112, 10),
            supply_v: Exact::new(18, 10),
            bitrate: Exact::from_integer(2_000_000_000),
        }
    }

    /// Only the analog link: driver and receiver front end.
    pub fn link_only(&self) -> Self {
        let zero = Exact::from_integer(0);
        Self {
            serializer_mw: zero,
            deserializer_mw: zero,
            cdr_mw: zero,
            ..self.clone()
        }
    }

    pub fn blocks(&self) -> [(&'static str, Exact); 5] {
        [
            ("serializer", self.serializer_mw),
            ("deserializer", self.deserializer_mw),
            ("cdr", self.cdr_mw),
            ("tx", self.tx_mw),
            ("rx", self.rx_mw),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub total_mw: Exact,
    pub energy_pj_per_bit: Exact,
    /// Percent of total per block; all zero when the total is zero.
    pub shares_pct: Vec<(&'static str, Exact)>,
    pub blocks_mw: Vec<(&'static str, Exact)>,
    pub supply_v: Exact,
    pub bitrate: Exact,
}

pub fn budget_report(b: &PowerBudget) -> Result<BudgetReport, Error> {
    let zero = Exact::from_integer(0);
    if b.bitrate <= zero {
        return Err(Error::InvalidInput("bitrate must be positive".into()));
    }
    let blocks = b.blocks();
    if let Some((name, _)) = blocks.iter().find(|(_, p)| *p < zero) {
        return Err(Error::InvalidInput(format!("{name} power is negative")));
    }
    let total: Exact = blocks.iter().map(|(_, p)| *p).sum();
    // mW / (bit/s) = 1e-3 J/bit = 1e9 pJ/bit
    let energy = total * Exact::from_integer(1_000_000_000) / b.bitrate;
    let shares = blocks
        .iter()
        .map(|&(name, p)| {
            let share = if total == zero {
                zero
            } else {
                p * Exact::from_integer(100) / total
            };
            (name, share)
        })
        .collect();
    Ok(BudgetReport {
        total_mw: total,
        energy_pj_per_bit: energy,
        shares_pct: shares,
        blocks_mw: blocks.to_vec(),
        supply_v: b.supply_v,
        bitrate: b.bitrate,
    })
}

impl BudgetReport {
    pub fn energy_rounded(&self) -> String {
        fmt_exact(&self.energy_pj_per_bit, 0)
    }

    /// `key,value`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        for (name, p) in &self.blocks_mw {
            let _ = writeln!(s, "power_{name}_mw,{}", fmt_exact(p, PLACES));
        }
        for (name, p) in &self.shares_pct {
            let _ = writeln!(s, "share_{name}_pct,{}", fmt_exact(p, PLACES));
        }
        let _ = writeln!(s, "total_mw,{}", fmt_exact(&self.total_mw, PLACES));
        let _ = writeln!(s, "energy_pj_per_bit,{}", fmt_exact(&self.energy_pj_per_bit, PLACES));
        let _ = writeln!(s, "energy_pj_per_bit_rounded,{}", self.energy_rounded());
        let _ = writeln!(s, "supply_v,{}", fmt_exact(&self.supply_v, PLACES));
        let _ = writeln!(s, "bitrate_bps,{}", fmt_exact(&self.bitrate, PLACES));
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| block | power (mW) | share (%) |\n|---|---:|---:|\n");
        for ((name, p), (_, share)) in self.blocks_mw.iter().zip(&self.shares_pct) {
            let _ = writeln!(s, "| {name} | {} | {} |", fmt_exact(p, 3), fmt_exact(share, 2));
        }
        let _ = writeln!(s, "| **total** | {} | 100 |", fmt_exact(&self.total_mw, 3));
        let _ = writeln!(
            s,
            "\nEnergy: {} pJ/bit ({} rounded) at {} Gbps, {} V supply.",
            fmt_exact(&self.energy_pj_per_bit, PLACES),
            self.energy_rounded(),
            fmt_exact(&(self.bitrate / Exact::from_integer(1_000_000_000)), 3),
            fmt_exact(&self.supply_v, 3),
        );
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaReport {
    pub total_mm2: Exact,
    /// `(block, share %, area mm²)`
    pub blocks: Vec<(String, Exact, Exact)>,
    pub unassigned_pct: Exact,
}

/// Area per block from percentage shares of `total_mm2`.
pub fn area_report(total_mm2: Exact, shares_pct: &[(&str, Exact)]) -> Result<AreaReport, Error> {
    let zero = Exact::from_integer(0);
    let hundred = Exact::from_integer(100);
    if total_mm2 < zero {
        return Err(Error::InvalidInput("total area is negative".into()));
    }
    if let Some((name, _)) = shares_pct.iter().find(|(_, p)| *p < zero || *p > hundred) {
        return Err(Error::InvalidInput(format!("{name} share outside [0, 100] %")));
    }
    let assigned: Exact = shares_pct.iter().map(|(_, p)| *p).sum();
    if assigned > hundred {
        return Err(Error::InvalidInput(format!(
            "shares add up to {} %",
            fmt_exact(&assigned, PLACES)
        )));
    }
    Ok(AreaReport {
        total_mm2,
        blocks: shares_pct
            .iter()
            .map(|&(n, p)| (n.to_string(), p, total_mm2 * p / hundred))
            .collect(),
        unassigned_pct: hundred - assigned,
    })
}

/// Reported layout: 0.24 mm² with the stated block shares.
pub fn reference_area() -> AreaReport {
    area_report(
        Exact::new(24, 100),
        &[
            ("deserializer", Exact::from_integer(60)),
            ("tx_driver", Exact::new(2, 10)),
            ("rx_front_end", Exact::new(11, 10)),
        ],
    )
    .expect("reference shares are consistent")
}

impl AreaReport {
    /// `block,share_pct,area_mm2`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("block,share_pct,area_mm2\n");
        for (name, share, area) in &self.blocks {
            let _ = writeln!(s, "{name},{},{}", fmt_exact(share, PLACES), fmt_exact(area, PLACES));
        }
        let hundred = Exact::from_integer(100);
        let _ = writeln!(
            s,
            "unassigned,{},{}",
            fmt_exact(&self.unassigned_pct, PLACES),
            fmt_exact(&(self.total_mm2 * self.unassigned_pct / hundred), PLACES)
        );
        let _ = writeln!(s, "total,100,{}", fmt_exact(&self.total_mm2, PLACES));
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| block | share (%) | area (mm²) |\n|---|---:|---:|\n");
        for (name, share, area) in &self.blocks {
            let _ = writeln!(s, "| {name} | {} | {} |", fmt_exact(share, 3), fmt_exact(area, 6));
        }
        let _ = writeln!(s, "| **total** | 100 | {} |", fmt_exact(&self.total_mm2, 6));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Exact {
        exact(s).unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("11.2"), Exact::new(56, 5));
        assert_eq!(q("2e9"), Exact::from_integer(2_000_000_000));
        assert_eq!(q("-0.25"), Exact::new(-1, 4));
        assert_eq!(q("1.5e-3"), Exact::new(3, 2000));
        for bad in ["", ".", "1.2.3", "abc", "1e", "--1"] {
            assert!(exact(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formats_terminating_and_rounded() {
        assert_eq!(fmt_exact(&q("437.7"), 6), "437.7");
        assert_eq!(fmt_exact(&q("218.85"), 0), "219");
        assert_eq!(fmt_exact(&q("218.85"), 1), "218.9");
        assert_eq!(fmt_exact(&Exact::new(1, 3), 4), "0.3333");
        assert_eq!(fmt_exact(&Exact::new(-1, 8), 6), "-0.125");
        assert_eq!(fmt_exact(&Exact::from_integer(0), 6), "0");
    }

    #[test]
    fn reference_budget() {
        let r = budget_report(&PowerBudget::reference()).unwrap();
        assert_eq!(r.total_mw, q("437.7"));
        assert_eq!(r.energy_pj_per_bit, q("218.85"));
        assert_eq!(r.energy_rounded(), "219");
        let sum: Exact = r.shares_pct.iter().map(|(_, s)| *s).sum();
        assert_eq!(sum, Exact::from_integer(100));
    }

    #[test]
    fn link_only_budget() {
        let r = budget_report(&PowerBudget::reference().link_only()).unwrap();
        assert_eq!(r.total_mw, q("15.7"));
    }

    #[test]
    fn zero_bitrate_is_an_error() {
        let b = PowerBudget {
            bitrate: Exact::from_integer(0),
            ..PowerBudget::reference()
        };
        assert!(budget_report(&b).is_err());
    }

    #[test]
    fn all_zero_budget() {
        let zero = Exact::from_integer(0);
        let b = PowerBudget {
            serializer_mw: zero,
            deserializer_mw: zero,
            cdr_mw: zero,
            tx_mw: zero,
            rx_mw: zero,
            ..PowerBudget::reference()
        };
        let r = budget_report(&b).unwrap();
        assert_eq!(r.total_mw, zero);
        assert_eq!(r.energy_pj_per_bit, zero);
        assert!(r.shares_pct.iter().all(|(_, s)| *s == zero));
    }

    #[test]
    fn reference_area_figures() {
        let a = reference_area();
        assert_eq!(a.blocks[0].2, q("0.144"));
        assert_eq!(a.blocks[1].2, q("0.00048"));
        assert_eq!(a.blocks[2].2, q("0.00264"));
        assert_eq!(a.unassigned_pct, q("38.7"));
    }

    #[test]
    fn full_share_is_the_total() {
        let a = area_report(q("0.24"), &[("all", Exact::from_integer(100))]).unwrap();
        assert_eq!(a.blocks[0].2, q("0.24"));
    }

    #[test]
    fn overfull_shares_are_rejected() {
        let r = area_report(q("1"), &[("a", q("60")), ("b", q("45"))]);
        assert!(r.is_err());
    }

    #[test]
    fn reports_are_stable() {
        let r = budget_report(&PowerBudget::reference()).unwrap();
        assert_eq!(r.to_csv(), r.clone().to_csv());
        assert!(r.to_csv().contains("\ntotal_mw,437.7\n"));
        assert!(r.to_markdown().contains("218.85 pJ/bit (219 rounded)"));
        assert!(reference_area().to_csv().contains("deserializer,60,0.144\n"));
    }

    proptest! {
        #[test]
        fn total_is_exact_sum(parts in prop::collection::vec(0u32..1_000_000, 5)) {
            let mw: Vec<Exact> = parts.iter().map(|&p| Exact::new(p as i128, 1000)).collect();
            let b = PowerBudget {
                serializer_mw: mw[0],
                deserializer_mw: mw[1],
                cdr_mw: mw[2],
                tx_mw: mw[3],
                rx_mw: mw[4],
                ..PowerBudget::reference()
            };
            let r = budget_report(&b).unwrap();
            prop_assert_eq!(r.total_mw, mw.iter().sum::<Exact>());
            let sum: Exact = r.shares_pct.iter().map(|(_, s)| *s).sum();
            let expected = if r.total_mw == Exact::from_integer(0) { 0 } else { 100 };
            prop_assert_eq!(sum, Exact::from_integer(expected));
        }

        #[test]
        fn decimal_round_trip(n in -10_000_000i64..10_000_000, places in 0u32..6) {
            let r = Exact::new(n as i128, 10i128.pow(places));
            prop_assert_eq!(exact(&fmt_exact(&r, 6)).unwrap(), r);
        }
    }
}
