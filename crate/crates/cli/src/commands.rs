use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use oneshot_info::asymptotics::{self, CONVERGENCE_CSV_HEADER};
use oneshot_info::hashing::{self, CollisionMode};
use oneshot_info::mac::{self, MacSimulationConfig, MessageChoice};
use oneshot_info::probability::{ChannelFile, PmfFile};
use oneshot_info::report::CSV_HEADER;
use oneshot_info::slepian_wolf::{self, SimulationConfig};
use oneshot_info::smoothing::oracle::{oracle_smooth, SmoothOrder};
use oneshot_info::{
    build_typical_set, find_delta, renyi, shannon, smooth_conditional_h0, smooth_conditional_hneginf, smooth_h0,
    smooth_hinf, smooth_hneginf, Caps, Channel, EntropyOrder, EpsilonBudget, Error, JointPmf, Pmf, SmoothingResult,
};

use crate::{Budget, Command, Format, Sim};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    /// Unreadable or malformed input, or an output that cannot be written.
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Core(Error::Domain(_)) => 2,
            CliError::Core(Error::Precondition(_) | Error::Infeasible(_)) => 3,
            CliError::Core(Error::Resource(_)) => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let field = if field == "." { "<root>".to_string() } else { field };
        CliError::Input(format!("{}: field `{field}`: {}", path.display(), e.inner()))
    })
}

pub fn load_joint(path: &Path) -> Result<JointPmf> {
    let file: PmfFile = read_json(path)?;
    file.to_joint().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_pmf(path: &Path) -> Result<Pmf> {
    Pmf::try_from(load_joint(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_channel(path: &Path) -> Result<Channel> {
    let file: ChannelFile = read_json(path)?;
    file.to_channel().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        let _ = writeln!(out, "{r}");
    }
    out
}

fn budget_of(b: &Budget) -> Result<EpsilonBudget> {
    Ok(match &b.eps_split {
        Some(parts) => {
            let parts: [f64; 4] = parts
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Input(format!("--eps-split needs 4 values, got {}", parts.len())))?;
            EpsilonBudget::new(b.eps, parts)?
        }
        None => EpsilonBudget::equal(b.eps)?,
    })
}

fn choose_delta(joint: &JointPmf, b: &Budget, budget: &EpsilonBudget, caps: &Caps) -> Result<f64> {
    Ok(match b.delta {
        Some(d) => d,
        None => find_delta(joint, budget.parts[0], b.delta_step, caps)?,
    })
}

fn extend(joint: JointPmf, n: usize, caps: &Caps) -> Result<JointPmf> {
    if n == 0 {
        return Err(Error::Domain("blocklength n must be at least 1".into()).into());
    }
    Ok(if n == 1 { joint } else { joint.iid_extension(n, caps)? })
}

fn pair<T: Copy>(flag: &str, v: &Option<Vec<T>>) -> Result<Option<(T, T)>> {
    match v.as_deref() {
        None => Ok(None),
        Some(&[a, b]) => Ok(Some((a, b))),
        Some(other) => Err(CliError::Input(format!("{flag} needs 2 values, got {}", other.len()))),
    }
}

fn smooth_report(r: &SmoothingResult, order: &str, eps: f64, caps: &Caps) -> Result<serde_json::Value> {
    Ok(json!({
        "order": order,
        "eps": eps,
        "value_bits": r.value_bits,
        "moved_mass": r.moved_mass,
        "method": r.method,
        "witness": r.witness.to_file(caps)?,
    }))
}

pub fn run(command: &Command, caps: &Caps, format: Format) -> Result<String> {
    match command {
        Command::Entropy { pmf } => {
            let p = load_joint(pmf)?;
            let [h, h0, hinf, hneginf] = [
                shannon(&p),
                renyi(&p, EntropyOrder::Zero),
                renyi(&p, EntropyOrder::Infinity),
                renyi(&p, EntropyOrder::NegInfinity),
            ];
            match format {
                Format::Json => to_json(&json!({ "shannon": h, "h0": h0, "hinf": hinf, "hneginf": hneginf })),
                Format::Csv => Ok(csv("shannon,h0,hinf,hneginf", [format!("{h},{h0},{hinf},{hneginf}")])),
            }
        }
        Command::Smooth { pmf, order, eps, target, given, oracle } => {
            let p = load_joint(pmf)?;
            let which = match order.as_str() {
                "0" => SmoothOrder::Zero,
                "inf" | "+inf" => SmoothOrder::Infinity,
                "-inf" => SmoothOrder::NegInfinity,
                other => return Err(CliError::Input(format!("--order {other:?}: expected 0, inf or -inf"))),
            };
            let cond = target.as_deref().zip(given.as_deref());
            let r = if *oracle {
                oracle_smooth(&p, *eps, which, cond)?
            } else {
                match (which, cond) {
                    (SmoothOrder::Zero, None) => smooth_h0(&p, *eps)?,
                    (SmoothOrder::Infinity, None) => smooth_hinf(&p, *eps)?,
                    (SmoothOrder::NegInfinity, None) => smooth_hneginf(&p, *eps)?,
                    (SmoothOrder::Zero, Some((t, g))) => smooth_conditional_h0(&p, t, g, *eps)?,
                    (SmoothOrder::NegInfinity, Some((t, g))) => smooth_conditional_hneginf(&p, t, g, *eps)?,
                    (SmoothOrder::Infinity, Some(_)) => oracle_smooth(&p, *eps, which, cond)?,
                }
            };
            match format {
                Format::Json => to_json(&smooth_report(&r, order, *eps, caps)?),
                Format::Csv => Ok(csv(
                    "order,eps,value_bits,moved_mass",
                    [format!("{order},{eps},{},{}", r.value_bits, r.moved_mass)],
                )),
            }
        }
        Command::Typical { pmf, delta } => {
            let p = load_joint(pmf)?;
            let set = build_typical_set(&p, *delta, caps)?;
            match format {
                Format::Json => to_json(&set.to_export()),
                Format::Csv => {
                    let header: Vec<&str> = p.axes().iter().map(|a| a.name.as_str()).collect();
                    Ok(csv(&header.join(","), set.members().iter().map(|&f| p.labels(f).join(","))))
                }
            }
        }
        Command::FindDelta { pmf, eps, delta_step } => {
            let p = load_joint(pmf)?;
            let delta = find_delta(&p, *eps, *delta_step, caps)?;
            let tail = build_typical_set(&p, delta, caps)?.tail();
            match format {
                Format::Json => to_json(&json!({ "eps0": eps, "delta_step": delta_step, "delta": delta, "tail": tail })),
                Format::Csv => Ok(csv("eps0,delta_step,delta,tail", [format!("{eps},{delta_step},{delta},{tail}")])),
            }
        }
        Command::SwRegion { pmf, n, budget } => {
            let joint = extend(load_joint(pmf)?, *n, caps)?;
            let b = budget_of(budget)?;
            let delta = choose_delta(&joint, budget, &b, caps)?;
            let region = slepian_wolf::sw_achievable_region(&joint, &b, delta, caps)?;
            let lengths = region.integer_lengths().ok();
            match format {
                Format::Json => to_json(&json!({ "region": region, "integer_lengths": lengths })),
                Format::Csv => {
                    let (lo, a) = (region.lower, region.achievable);
                    Ok(csv(
                        "delta,tail,lower_x,lower_y,lower_sum,achievable_x,achievable_y,achievable_sum",
                        [format!(
                            "{delta},{},{},{},{},{},{},{}",
                            region.tail, lo.l_x, lo.l_y, lo.l_sum, a.l_x, a.l_y, a.l_sum
                        )],
                    ))
                }
            }
        }
        Command::SwSim { pmf, n, budget, sim, lengths } => {
            let joint = extend(load_joint(pmf)?, *n, caps)?;
            let b = budget_of(budget)?;
            let delta = choose_delta(&joint, budget, &b, caps)?;
            let lengths = match pair("--lengths", lengths)? {
                Some(l) => l,
                None => slepian_wolf::sw_achievable_region(&joint, &b, delta, caps)?.integer_lengths()?,
            };
            let cfg = SimulationConfig {
                trials: sim.trials,
                master_seed: sim.seed,
                exact: sim.exact,
                target_eps: b.total,
            };
            let report = slepian_wolf::sw_simulate(&joint, lengths, delta, &cfg, caps)?;
            match format {
                Format::Json => to_json(&json!({ "delta": delta, "lengths": lengths, "seed": sim.seed, "report": report })),
                Format::Csv => Ok(csv(CSV_HEADER, [report.to_csv_row()])),
            }
        }
        Command::MacRegion { px, py, channel, n, budget } => {
            let (p_x, p_y, ch) = load_mac(px, py, channel, *n, caps)?;
            let joint3 = mac::induced_joint(&p_x, &p_y, &ch)?;
            let b = budget_of(budget)?;
            let delta = choose_delta(&joint3, budget, &b, caps)?;
            let region = mac::mac_achievable_region(&joint3, &b, delta, caps)?;
            let rates = region.integer_rates().ok();
            match format {
                Format::Json => to_json(&json!({ "region": region, "integer_rates": rates })),
                Format::Csv => Ok(csv(
                    "delta,tail,c1_max,c2_max,sum_max",
                    [format!("{delta},{},{},{},{}", region.tail, region.c1_max, region.c2_max, region.sum_max)],
                )),
            }
        }
        Command::MacSim { px, py, channel, n, budget, sim, rates, uniform_messages } => {
            let (p_x, p_y, ch) = load_mac(px, py, channel, *n, caps)?;
            let joint3 = mac::induced_joint(&p_x, &p_y, &ch)?;
            let b = budget_of(budget)?;
            let delta = choose_delta(&joint3, budget, &b, caps)?;
            let rates = match pair("--rates", rates)? {
                Some(r) => r,
                None => mac::mac_achievable_region(&joint3, &b, delta, caps)?.integer_rates()?,
            };
            let cfg = mac_config(sim, &b, *uniform_messages);
            let report = mac::mac_simulate(&p_x, &p_y, &ch, rates, delta, &cfg, caps)?;
            match format {
                Format::Json => to_json(&json!({ "delta": delta, "rates": rates, "seed": sim.seed, "report": report })),
                Format::Csv => Ok(csv(CSV_HEADER, [report.to_csv_row()])),
            }
        }
        Command::AsymScan { pmf, eps, n_max } => {
            let p = load_pmf(pmf)?;
            let rows = asymptotics::convergence_scan(&p, *eps, *n_max, caps)?;
            match format {
                Format::Json => {
                    let lemma4 = (1..=*n_max)
                        .map(|n| asymptotics::lemma4_z_bound(&p, n, *eps, caps))
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    let n0 = asymptotics::n0(*eps, p.alphabet().len()).ok();
                    to_json(&json!({ "eps": eps, "n0": n0, "rows": rows, "lemma4": lemma4 }))
                }
                Format::Csv => Ok(csv(CONVERGENCE_CSV_HEADER, rows.iter().map(|r| r.to_csv_row()))),
            }
        }
        Command::HashCheck { domain, bits, trials, seed } => {
            let mode = match (trials, seed) {
                (Some(trials), Some(seed)) => CollisionMode::MonteCarlo { trials: *trials, master_seed: *seed },
                _ => CollisionMode::Exact,
            };
            let stats = hashing::collision_probability(*domain, *bits, mode)?;
            match format {
                Format::Json => to_json(&stats),
                Format::Csv => Ok(csv(
                    "mode,domain_size,input_bits,output_bits,ideal,max_pair_probability,min_pair_probability,trials,collisions,stderr",
                    [format!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        stats.mode,
                        stats.domain_size,
                        stats.input_bits,
                        stats.output_bits,
                        stats.ideal,
                        stats.max_pair_probability,
                        stats.min_pair_probability,
                        stats.trials,
                        stats.collisions,
                        stats.stderr
                    )],
                )),
            }
        }
    }
}

fn load_mac(px: &Path, py: &Path, channel: &Path, n: usize, caps: &Caps) -> Result<(Pmf, Pmf, Channel)> {
    let (p_x, p_y, ch) = (load_pmf(px)?, load_pmf(py)?, load_channel(channel)?);
    if n == 0 {
        return Err(Error::Domain("blocklength n must be at least 1".into()).into());
    }
    if n == 1 {
        return Ok((p_x, p_y, ch));
    }
    Ok((p_x.iid_extension(n, caps)?, p_y.iid_extension(n, caps)?, ch.iid_extension(n, caps)?))
}

fn mac_config(sim: &Sim, b: &EpsilonBudget, uniform: bool) -> MacSimulationConfig {
    MacSimulationConfig {
        trials: sim.trials,
        master_seed: sim.seed,
        exact: sim.exact,
        target_eps: b.total,
        messages: if uniform { MessageChoice::Uniform } else { MessageChoice::Fixed },
        budget: Some(*b),
    }
}
