//! Attack cases in the seven-list schema and the per-control-step bias
//! generator.
//!
//! An attack case names victim followers, their attack periods (closed
//! control-step intervals), and per period the corrupted channels with a
//! stealth mask and a bias waveform for each. For control step `k` the
//! generator produces one `(max_iterations × n)` matrix per channel; column
//! `j` holds the bias added to the outgoing messages of follower `j + 1`,
//! row `t` the value for iteration `t` of that control step.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyKind {
    Continuous,
    Cluster,
    Discrete,
}

/// On/off pattern of the bias across iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Continuous,
    /// `on` iterations with bias followed by `off` without, repeating from t = 0.
    Cluster { on: usize, off: usize },
}

impl Frequency {
    /// Validate a kind and its parameter list. `Discrete` becomes a cluster
    /// with `on = 1`; it accepts either `[off]` or `[1, off]`.
    pub fn from_parts(kind: FrequencyKind, params: &[f64]) -> Result<Self> {
        let count = |v: f64, name: &str| -> Result<usize> {
            if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Parameter(format!("{name} must be a non-negative integer, got {v}")))
            }
        };
        match kind {
            FrequencyKind::Continuous => Ok(Frequency::Continuous),
            FrequencyKind::Cluster => match params {
                [on, off] => Frequency::cluster(count(*on, "on")?, count(*off, "off")?),
                _ => Err(Error::Parameter(format!(
                    "Cluster expects [on, off], got {} values",
                    params.len()
                ))),
            },
            FrequencyKind::Discrete => match params {
                [off] => Frequency::cluster(1, count(*off, "off")?),
                [on, off] if *on == 1.0 => Frequency::cluster(1, count(*off, "off")?),
                _ => Err(Error::Parameter("Discrete expects [off] or [1, off]".into())),
            },
        }
    }

    pub fn cluster(on: usize, off: usize) -> Result<Self> {
        if on < 1 {
            return Err(Error::Parameter("Cluster on-window must be at least 1".into()));
        }
        Ok(Frequency::Cluster { on, off })
    }

    pub fn is_active(&self, t: usize) -> bool {
        match *self {
            Frequency::Continuous => true,
            Frequency::Cluster { on, off } => t % (on + off) < on,
        }
    }

    fn kind_and_params(&self) -> (FrequencyKind, Vec<f64>) {
        match *self {
            Frequency::Continuous => (FrequencyKind::Continuous, vec![0.0]),
            Frequency::Cluster { on, off } => (FrequencyKind::Cluster, vec![on as f64, off as f64]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BiasKind {
    Constant,
    Linear,
    Sinusoidal,
}

/// Bias value as a function of the iteration index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasWaveform {
    Constant { c: f64 },
    /// `m·t + c`.
    Linear { m: f64, c: f64 },
    /// `A·sin(2π·f·t/max_iterations + theta) + c`; `f` counts cycles per control step.
    Sinusoidal { amplitude: f64, frequency: f64, theta: f64, c: f64 },
}

impl BiasWaveform {
    pub fn from_parts(kind: BiasKind, params: &[f64]) -> Result<Self> {
        if let Some(v) = params.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("bias parameter {v} is not finite")));
        }
        let arity = |want: usize| -> Result<()> {
            if params.len() == want {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{kind:?} bias expects {want} parameters, got {}",
                    params.len()
                )))
            }
        };
        Ok(match kind {
            BiasKind::Constant => {
                arity(1)?;
                BiasWaveform::Constant { c: params[0] }
            }
            BiasKind::Linear => {
                arity(2)?;
                BiasWaveform::Linear { m: params[0], c: params[1] }
            }
            BiasKind::Sinusoidal => {
                arity(4)?;
                BiasWaveform::Sinusoidal {
                    amplitude: params[0],
                    frequency: params[1],
                    theta: params[2],
                    c: params[3],
                }
            }
        })
    }

    fn kind_and_params(&self) -> (BiasKind, Vec<f64>) {
        match *self {
            BiasWaveform::Constant { c } => (BiasKind::Constant, vec![c]),
            BiasWaveform::Linear { m, c } => (BiasKind::Linear, vec![m, c]),
            BiasWaveform::Sinusoidal { amplitude, frequency, theta, c } => {
                (BiasKind::Sinusoidal, vec![amplitude, frequency, theta, c])
            }
        }
    }
}

/// Waveform value at iteration `t` of a control step with `max_iterations` rows.
pub fn bias_waveform(waveform: &BiasWaveform, t: usize, max_iterations: usize) -> f64 {
    let t = t as f64;
    match *waveform {
        BiasWaveform::Constant { c } => c,
        BiasWaveform::Linear { m, c } => m * t + c,
        BiasWaveform::Sinusoidal { amplitude, frequency, theta, c } => {
            let phase = 2.0 * std::f64::consts::PI * frequency * (t / max_iterations as f64);
            amplitude * (phase + theta).sin() + c
        }
    }
}

/// 0/1 mask of length `max_iterations`.
pub fn stealth_mask(frequency: &Frequency, max_iterations: usize) -> Vec<f64> {
    (0..max_iterations)
        .map(|t| if frequency.is_active(t) { 1.0 } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAttack {
    pub channel: ChannelId,
    pub frequency: Frequency,
    pub waveform: BiasWaveform,
}

/// Mask times waveform over one control step.
pub fn iter_channel_bias(attack: &ChannelAttack, max_iterations: usize) -> Vec<f64> {
    stealth_mask(&attack.frequency, max_iterations)
        .into_iter()
        .enumerate()
        .map(|(t, m)| m * bias_waveform(&attack.waveform, t, max_iterations))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackPeriod {
    pub start: usize,
    pub end: usize,
    pub channels: Vec<ChannelAttack>,
}

impl AttackPeriod {
    /// Closed interval.
    pub fn contains(&self, k: usize) -> bool {
        self.start <= k && k <= self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VictimAttack {
    /// Follower number (1-based).
    pub vehicle: usize,
    pub periods: Vec<AttackPeriod>,
}

/// Validated attack case. An empty case is the benign run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttackCase {
    pub victims: Vec<VictimAttack>,
}

/// The seven parallel lists as written in configuration files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackCaseLists {
    pub iter_victim_list: Vec<i64>,
    pub control_attackperiod_list: Vec<Vec<Vec<i64>>>,
    pub iter_malichannel_list: Vec<Vec<Vec<String>>>,
    pub iter_freq_type_list: Vec<Vec<Vec<String>>>,
    pub iter_freqparavalue_list: Vec<Vec<Vec<Vec<f64>>>>,
    pub iter_biastype_list: Vec<Vec<Vec<String>>>,
    pub iter_biasparavalue_list: Vec<Vec<Vec<Vec<f64>>>>,
}

fn expect_len(path: &str, what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::attack(path, format!("{what} has {got} entries, expected {want}")))
    }
}

fn parse_name<T: for<'de> Deserialize<'de>>(path: &str, name: &str) -> Result<T> {
    T::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(name))
        .map_err(|e| Error::attack(path, e.to_string()))
}

impl AttackCase {
    pub fn benign() -> Self {
        Self::default()
    }

    pub fn is_benign(&self) -> bool {
        self.victims.iter().all(|v| v.periods.iter().all(|p| p.channels.is_empty()))
    }

    /// Check congruent nesting of the seven lists and build the case.
    /// When `n` is given, victim indices must lie in `[1, n]`.
    pub fn from_lists(lists: &AttackCaseLists, n: Option<usize>) -> Result<Self> {
        let victims = &lists.iter_victim_list;
        let nv = victims.len();
        expect_len("control_attackperiod_list", "victim list", lists.control_attackperiod_list.len(), nv)?;
        expect_len("iter_malichannel_list", "victim list", lists.iter_malichannel_list.len(), nv)?;
        expect_len("iter_freq_type_list", "victim list", lists.iter_freq_type_list.len(), nv)?;
        expect_len("iter_freqparavalue_list", "victim list", lists.iter_freqparavalue_list.len(), nv)?;
        expect_len("iter_biastype_list", "victim list", lists.iter_biastype_list.len(), nv)?;
        expect_len("iter_biasparavalue_list", "victim list", lists.iter_biasparavalue_list.len(), nv)?;

        let mut out = Vec::with_capacity(nv);
        for (i, &vehicle) in victims.iter().enumerate() {
            let vpath = |list: &str| format!("{list}[{i}] (victim fv{vehicle})");
            let upper = n.unwrap_or(usize::MAX);
            if vehicle < 1 || vehicle as u64 > upper as u64 {
                return Err(Error::attack(
                    format!("iter_victim_list[{i}]"),
                    match n {
                        Some(n) => format!("victim {vehicle} outside [1, {n}]"),
                        None => format!("victim {vehicle} must be at least 1"),
                    },
                ));
            }
            let periods = &lists.control_attackperiod_list[i];
            let np = periods.len();
            expect_len(&vpath("iter_malichannel_list"), "period list", lists.iter_malichannel_list[i].len(), np)?;
            expect_len(&vpath("iter_freq_type_list"), "period list", lists.iter_freq_type_list[i].len(), np)?;
            expect_len(&vpath("iter_freqparavalue_list"), "period list", lists.iter_freqparavalue_list[i].len(), np)?;
            expect_len(&vpath("iter_biastype_list"), "period list", lists.iter_biastype_list[i].len(), np)?;
            expect_len(&vpath("iter_biasparavalue_list"), "period list", lists.iter_biasparavalue_list[i].len(), np)?;

            let mut built = Vec::with_capacity(np);
            for (j, interval) in periods.iter().enumerate() {
                let ppath = |list: &str| format!("{list}[{i}][{j}] (victim fv{vehicle})");
                let (start, end) = match interval.as_slice() {
                    [s, e] if *s >= 0 && s <= e => (*s as usize, *e as usize),
                    _ => {
                        return Err(Error::attack(
                            ppath("control_attackperiod_list"),
                            format!("expected [start, end] with 0 <= start <= end, got {interval:?}"),
                        ))
                    }
                };
                let channels = &lists.iter_malichannel_list[i][j];
                let nc = channels.len();
                expect_len(&ppath("iter_freq_type_list"), "channel list", lists.iter_freq_type_list[i][j].len(), nc)?;
                expect_len(&ppath("iter_freqparavalue_list"), "channel list", lists.iter_freqparavalue_list[i][j].len(), nc)?;
                expect_len(&ppath("iter_biastype_list"), "channel list", lists.iter_biastype_list[i][j].len(), nc)?;
                expect_len(&ppath("iter_biasparavalue_list"), "channel list", lists.iter_biasparavalue_list[i][j].len(), nc)?;

                let mut attacks = Vec::with_capacity(nc);
                for m in 0..nc {
                    let cpath = |list: &str| format!("{list}[{i}][{j}][{m}] (victim fv{vehicle})");
                    let channel: ChannelId = parse_name(&cpath("iter_malichannel_list"), &channels[m])?;
                    let fkind: FrequencyKind =
                        parse_name(&cpath("iter_freq_type_list"), &lists.iter_freq_type_list[i][j][m])?;
                    let frequency = Frequency::from_parts(fkind, &lists.iter_freqparavalue_list[i][j][m])
                        .map_err(|e| Error::attack(cpath("iter_freqparavalue_list"), e.to_string()))?;
                    let bkind: BiasKind = parse_name(&cpath("iter_biastype_list"), &lists.iter_biastype_list[i][j][m])?;
                    let waveform = BiasWaveform::from_parts(bkind, &lists.iter_biasparavalue_list[i][j][m])
                        .map_err(|e| Error::attack(cpath("iter_biasparavalue_list"), e.to_string()))?;
                    attacks.push(ChannelAttack { channel, frequency, waveform });
                }
                built.push(AttackPeriod { start, end, channels: attacks });
            }
            out.push(VictimAttack { vehicle: vehicle as usize, periods: built });
        }
        Ok(AttackCase { victims: out })
    }

    pub fn to_lists(&self) -> AttackCaseLists {
        let mut l = AttackCaseLists::default();
        for victim in &self.victims {
            l.iter_victim_list.push(victim.vehicle as i64);
            let mut periods = vec![];
            let (mut chans, mut ftypes, mut fparams, mut btypes, mut bparams) =
                (vec![], vec![], vec![], vec![], vec![]);
            for p in &victim.periods {
                periods.push(vec![p.start as i64, p.end as i64]);
                let (mut c, mut ft, mut fp, mut bt, mut bp) = (vec![], vec![], vec![], vec![], vec![]);
                for a in &p.channels {
                    c.push(a.channel.as_str().to_string());
                    let (fk, fpar) = a.frequency.kind_and_params();
                    ft.push(format!("{fk:?}"));
                    fp.push(fpar);
                    let (bk, bpar) = a.waveform.kind_and_params();
                    bt.push(format!("{bk:?}"));
                    bp.push(bpar);
                }
                chans.push(c);
                ftypes.push(ft);
                fparams.push(fp);
                btypes.push(bt);
                bparams.push(bp);
            }
            l.control_attackperiod_list.push(periods);
            l.iter_malichannel_list.push(chans);
            l.iter_freq_type_list.push(ftypes);
            l.iter_freqparavalue_list.push(fparams);
            l.iter_biastype_list.push(btypes);
            l.iter_biasparavalue_list.push(bparams);
        }
        l
    }

    /// Largest victim index referenced, if any.
    pub fn max_victim(&self) -> Option<usize> {
        self.victims.iter().map(|v| v.vehicle).max()
    }

    /// Every control step that falls inside some attack period.
    pub fn attacked_steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.victims.iter().flat_map(|v| v.periods.iter().map(|p| (p.start, p.end)))
    }

    pub fn is_attacked_at(&self, k: usize) -> bool {
        self.attacked_steps().any(|(s, e)| s <= k && k <= e)
    }
}

/// Parse a TOML document whose top level holds the seven lists.
pub fn parse_attack_case(text: &str, n: Option<usize>) -> Result<AttackCase> {
    let lists: AttackCaseLists =
        toml::from_str(text).map_err(|e| Error::attack("<document>", e.message().to_string()))?;
    AttackCase::from_lists(&lists, n)
}

/// Additive bias for the four vulnerable channels at one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMatrices {
    pub x_ite: DMatrix<f64>,
    pub v_ite: DMatrix<f64>,
    pub zx_ite: DMatrix<f64>,
    pub zv_ite: DMatrix<f64>,
}

impl BiasMatrices {
    pub fn zeros(max_iterations: usize, n: usize) -> Self {
        let z = DMatrix::zeros(max_iterations, n);
        Self { x_ite: z.clone(), v_ite: z.clone(), zx_ite: z.clone(), zv_ite: z }
    }

    pub fn rows(&self) -> usize {
        self.x_ite.nrows()
    }

    pub fn cols(&self) -> usize {
        self.x_ite.ncols()
    }

    pub fn channel(&self, id: ChannelId) -> &DMatrix<f64> {
        match id {
            ChannelId::XIte => &self.x_ite,
            ChannelId::VIte => &self.v_ite,
            ChannelId::ZxIte => &self.zx_ite,
            ChannelId::ZvIte => &self.zv_ite,
        }
    }

    pub fn channel_mut(&mut self, id: ChannelId) -> &mut DMatrix<f64> {
        match id {
            ChannelId::XIte => &mut self.x_ite,
            ChannelId::VIte => &mut self.v_ite,
            ChannelId::ZxIte => &mut self.zx_ite,
            ChannelId::ZvIte => &mut self.zv_ite,
        }
    }

    /// Bias for `channel` at iteration `t` on messages sent by follower `follower` (1-based).
    pub fn get(&self, channel: ChannelId, t: usize, follower: usize) -> f64 {
        let m = self.channel(channel);
        if t < m.nrows() && follower >= 1 && follower <= m.ncols() {
            m[(t, follower - 1)]
        } else {
            0.0
        }
    }

    pub fn is_zero(&self) -> bool {
        ChannelId::ALL.iter().all(|&c| self.channel(c).iter().all(|&v| v == 0.0))
    }
}

impl std::ops::Add for &BiasMatrices {
    type Output = BiasMatrices;

    fn add(self, rhs: Self) -> BiasMatrices {
        BiasMatrices {
            x_ite: &self.x_ite + &rhs.x_ite,
            v_ite: &self.v_ite + &rhs.v_ite,
            zx_ite: &self.zx_ite + &rhs.zx_ite,
            zv_ite: &self.zv_ite + &rhs.zv_ite,
        }
    }
}

/// Bias matrices for control step `k`. Overlapping periods and channels on the
/// same victim add.
pub fn iter_attack_value_cal(n: usize, k: usize, max_iterations: usize, case: &AttackCase) -> BiasMatrices {
    let mut out = BiasMatrices::zeros(max_iterations, n);
    for victim in &case.victims {
        if victim.vehicle < 1 || victim.vehicle > n {
            continue;
        }
        let col = victim.vehicle - 1;
        for period in victim.periods.iter().filter(|p| p.contains(k)) {
            for attack in &period.channels {
                let vec = iter_channel_bias(attack, max_iterations);
                let mut column = out.channel_mut(attack.channel).column_mut(col);
                for (cell, b) in column.iter_mut().zip(vec) {
                    *cell += b;
                }
            }
        }
    }
    out
}

/// Bias matrices for control steps `0..steps`.
pub fn precompute_bias(
    n: usize,
    steps: usize,
    max_iterations: usize,
    case: &AttackCase,
    mode: ExecMode,
) -> Vec<BiasMatrices> {
    let ks: Vec<usize> = (0..steps).collect();
    exec::map(mode, &ks, |&k| iter_attack_value_cal(n, k, max_iterations, case))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const RUNNING_EXAMPLE: &str = r#"
iter_victim_list = [1, 3, 5]
control_attackperiod_list = [[[10, 20], [15, 25]], [[20, 30]], [[40, 60]]]
iter_malichannel_list = [[['x_ite', 'v_ite'], ['v_ite']], [['zx_ite']], [['zv_ite']]]
iter_freq_type_list = [[['Continuous', 'Continuous'], ['Cluster']], [['Continuous']], [['Cluster']]]
iter_freqparavalue_list = [[[[0], [0]], [[2, 8]]], [[[0]]], [[[1, 10]]]]
iter_biastype_list = [[['Constant', 'Constant'], ['Constant']], [['Linear']], [['Sinusoidal']]]
iter_biasparavalue_list = [[[[3], [2]], [[4]]], [[[2, 5]]], [[[10, 0.5, 0, 5]]]]
"#;

    fn running_example() -> AttackCase {
        parse_attack_case(RUNNING_EXAMPLE, Some(6)).unwrap()
    }

    #[test]
    fn parses_running_example() {
        let case = running_example();
        assert_eq!(case.victims.len(), 3);
        assert_eq!(case.victims[0].vehicle, 1);
        assert_eq!(case.victims[0].periods[1].start, 15);
        assert_eq!(case.victims[0].periods[1].channels[0].frequency, Frequency::Cluster { on: 2, off: 8 });
        assert_eq!(case.victims[2].periods[0].channels[0].channel, ChannelId::ZvIte);
        assert_eq!(
            case.victims[2].periods[0].channels[0].waveform,
            BiasWaveform::Sinusoidal { amplitude: 10.0, frequency: 0.5, theta: 0.0, c: 5.0 }
        );
        // lists round trip
        assert_eq!(AttackCase::from_lists(&case.to_lists(), Some(6)).unwrap(), case);
    }

    #[test]
    fn empty_case_is_benign() {
        let case = parse_attack_case("", Some(6)).unwrap();
        assert!(case.is_benign());
        assert!(iter_attack_value_cal(6, 10, 300, &case).is_zero());
    }

    #[test]
    fn period_shape_mismatch_names_victim() {
        let text = RUNNING_EXAMPLE.replace(
            "iter_malichannel_list = [[['x_ite', 'v_ite'], ['v_ite']], [['zx_ite']], [['zv_ite']]]",
            "iter_malichannel_list = [[['x_ite', 'v_ite'], ['v_ite']], [['zx_ite'], ['x_ite']], [['zv_ite']]]",
        );
        let err = parse_attack_case(&text, Some(6)).unwrap_err();
        match err {
            Error::AttackCase { path, .. } => {
                assert!(path.contains("iter_malichannel_list[1]"), "{path}");
                assert!(path.contains("fv3"), "{path}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_names_and_arity() {
        let bad_channel = RUNNING_EXAMPLE.replace("['zx_ite']", "['zz_ite']");
        assert!(matches!(parse_attack_case(&bad_channel, Some(6)), Err(Error::AttackCase { .. })));
        let bad_arity = RUNNING_EXAMPLE.replace("[[[2, 5]]]", "[[[2]]]");
        let err = parse_attack_case(&bad_arity, Some(6)).unwrap_err();
        assert!(err.to_string().contains("iter_biasparavalue_list[1][0][0]"), "{err}");
        let out_of_range = RUNNING_EXAMPLE.replace("[1, 3, 5]", "[1, 3, 7]");
        assert!(parse_attack_case(&out_of_range, Some(6)).is_err());
        let bad_interval = RUNNING_EXAMPLE.replace("[[40, 60]]", "[[60, 40]]");
        assert!(parse_attack_case(&bad_interval, Some(6)).is_err());
        let zero_on = RUNNING_EXAMPLE.replace("[[[1, 10]]]", "[[[0, 10]]]");
        assert!(parse_attack_case(&zero_on, Some(6)).is_err());
    }

    #[test]
    fn discrete_is_cluster_with_unit_on() {
        assert_eq!(
            Frequency::from_parts(FrequencyKind::Discrete, &[10.0]).unwrap(),
            Frequency::Cluster { on: 1, off: 10 }
        );
        assert_eq!(
            Frequency::from_parts(FrequencyKind::Discrete, &[1.0, 4.0]).unwrap(),
            Frequency::Cluster { on: 1, off: 4 }
        );
        assert!(Frequency::from_parts(FrequencyKind::Discrete, &[2.0, 4.0]).is_err());
    }

    #[test]
    fn masks() {
        assert_eq!(stealth_mask(&Frequency::Continuous, 300), vec![1.0; 300]);
        let m = stealth_mask(&Frequency::Cluster { on: 1, off: 10 }, 300);
        let ones: Vec<usize> = m.iter().enumerate().filter(|(_, &v)| v == 1.0).map(|(t, _)| t).collect();
        assert_eq!(ones, (0..300).step_by(11).collect::<Vec<_>>());
        assert_eq!(*ones.last().unwrap(), 297);

        // brute force: walk t and toggle per the on/off rule
        let (on, off) = (2, 5);
        let mut expected = Vec::new();
        let (mut active, mut left) = (true, on);
        for _ in 0..300 {
            expected.push(if active { 1.0 } else { 0.0 });
            left -= 1;
            if left == 0 {
                active = !active;
                left = if active { on } else { off };
            }
        }
        assert_eq!(stealth_mask(&Frequency::Cluster { on, off }, 300), expected);
        assert!(Frequency::cluster(0, 3).is_err());
    }

    #[test]
    fn waveforms() {
        let c = BiasWaveform::Constant { c: 4.0 };
        assert_eq!(bias_waveform(&c, 0, 300), 4.0);
        assert_eq!(bias_waveform(&c, 299, 300), 4.0);
        let lin = BiasWaveform::Linear { m: 0.0, c: 7.0 };
        assert_eq!(bias_waveform(&lin, 123, 300), 7.0);

        let sin = BiasWaveform::Sinusoidal { amplitude: 20.0, frequency: 5.0, theta: 0.0, c: 2.0 };
        let vals: Vec<f64> = (0..300).map(|t| bias_waveform(&sin, t, 300)).collect();
        for (t, v) in vals.iter().enumerate() {
            let direct = 20.0 * (2.0 * std::f64::consts::PI * 5.0 * t as f64 / 300.0).sin() + 2.0;
            assert!((v - direct).abs() < 1e-12);
        }
        let max = vals.iter().cloned().fold(f64::MIN, f64::max);
        let min = vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 22.0).abs() < 1e-9 && (min + 18.0).abs() < 1e-9);
        // five full cycles: period of 60 rows
        for t in 0..240 {
            assert!((vals[t] - vals[t + 60]).abs() < 1e-9);
        }
        assert!(vals[15] > 21.9 && vals[45] < -17.9);
    }

    #[test]
    fn channel_bias_vectors() {
        let a = ChannelAttack {
            channel: ChannelId::XIte,
            frequency: Frequency::Continuous,
            waveform: BiasWaveform::Constant { c: 3.0 },
        };
        assert_eq!(iter_channel_bias(&a, 300), vec![3.0; 300]);

        let a = ChannelAttack {
            channel: ChannelId::XIte,
            frequency: Frequency::Cluster { on: 1, off: 10 },
            waveform: BiasWaveform::Linear { m: 2.0, c: 5.0 },
        };
        let v = iter_channel_bias(&a, 300);
        for (t, &b) in v.iter().enumerate() {
            let want = if t % 11 == 0 { 2.0 * t as f64 + 5.0 } else { 0.0 };
            assert_eq!(b, want);
        }

        let a = ChannelAttack {
            channel: ChannelId::XIte,
            frequency: Frequency::Cluster { on: 1, off: 400 },
            waveform: BiasWaveform::Constant { c: 0.0 },
        };
        assert!(iter_channel_bias(&a, 300).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn running_example_at_15_and_25() {
        let case = running_example();
        let b = iter_attack_value_cal(6, 15, 300, &case);
        assert_eq!(b.rows(), 300);
        assert_eq!(b.cols(), 6);
        // fv1 x_ite: constant 3 from [10, 20]
        assert!(b.x_ite.column(0).iter().all(|&v| v == 3.0));
        // fv1 v_ite: constant 2 continuous plus cluster [2, 8] constant 4 from [15, 25]
        for t in 0..300 {
            let want = 2.0 + if t % 10 < 2 { 4.0 } else { 0.0 };
            assert_eq!(b.v_ite[(t, 0)], want);
        }
        for col in 1..6 {
            for id in ChannelId::ALL {
                assert!(b.channel(id).column(col).iter().all(|&v| v == 0.0));
            }
        }

        let b = iter_attack_value_cal(6, 25, 300, &case);
        assert!(b.x_ite.iter().all(|&v| v == 0.0));
        assert!(b.v_ite.column(0).iter().any(|&v| v != 0.0));
        assert!(b.zx_ite.column(2).iter().any(|&v| v != 0.0)); // fv3 [20, 30]
    }

    #[test]
    fn closed_interval_boundaries() {
        let case = running_example();
        let col = |k| iter_attack_value_cal(6, k, 300, &case).zv_ite.column(4).iter().any(|&v| v != 0.0);
        assert!(!col(39));
        assert!(col(40));
        assert!(col(60));
        assert!(!col(61));
        assert!(iter_attack_value_cal(6, 100, 300, &case).is_zero());
    }
}
