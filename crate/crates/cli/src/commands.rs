use std::fmt::Write as _;
use std::path::Path;

use arena_core::corpus::{corpus, corpus_of_class, random_profile, run_bound_suites, CostClass, Suite};
use arena_core::equilibrium::{
    analyze_with, best_response_dynamics_with, default_max_steps, EnumConfig, Ratio, Schedule,
};
use arena_core::gadgets::{
    build_poa_unbounded, build_pos_linear_for, build_pos_nharmonic, default_q_probe_max, verify_gadget_with,
    Expectation, Gadget, GadgetKind, Relation,
};
use arena_core::potential::potential;
use arena_core::protocol::private_cost;
use arena_core::rational::format_rational;
use arena_core::{GameModel, Protocol, Rational, StrategyProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::format::{parse_profile, Game, GameFile, ProtocolArg};
use crate::{CliError, Output};

fn r(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn ratio(x: &Ratio) -> Value {
    Value::String(x.to_string())
}

fn profile_json(p: &StrategyProfile) -> Value {
    json!(p.choices())
}

fn checked_profile(model: &GameModel, choices: Vec<usize>) -> Result<StrategyProfile, CliError> {
    let profile = StrategyProfile::new(choices);
    model
        .validate_profile(&profile)
        .map_err(|e| CliError::Profile(e.to_string()))?;
    Ok(profile)
}

pub fn analyze(game: &Game, protocol: &Protocol, cfg: &EnumConfig) -> Result<Output, CliError> {
    let model = game.model()?;
    let report = analyze_with(&model, protocol, cfg)?;
    let pne: Vec<Value> = report
        .pne
        .iter()
        .map(|e| {
            json!({
                "profile": profile_json(&e.profile),
                "cost": r(&e.cost),
                "potential": e.potential.as_ref().map(r),
            })
        })
        .collect();
    let potentials = protocol.is_shapley().then(|| {
        report
            .pne
            .iter()
            .map(|e| r(e.potential.as_ref().expect("tracked")))
            .collect::<Vec<_>>()
    });
    let json = json!({
        "protocol": report.protocol,
        "players": model.players(),
        "pne": pne,
        "optimum": {"profile": profile_json(&report.optimum), "cost": r(&report.optimum_cost)},
        "poa": ratio(&report.poa),
        "pos": ratio(&report.pos),
        "potential": potentials,
    });

    let mut human = String::new();
    let _ = writeln!(human, "protocol {}  players {}", report.protocol, model.players());
    let _ = writeln!(
        human,
        "optimum  {:?}  cost {}",
        report.optimum.choices(),
        format_rational(&report.optimum_cost)
    );
    let _ = writeln!(human, "{:<24} {:>12} {:>12}", "equilibrium", "cost", "potential");
    for e in &report.pne {
        let phi = e.potential.as_ref().map_or("-".to_string(), format_rational);
        let _ = writeln!(
            human,
            "{:<24} {:>12} {:>12}",
            format!("{:?}", e.profile.choices()),
            format_rational(&e.cost),
            phi
        );
    }
    if report.pne.is_empty() {
        let _ = writeln!(human, "(no pure Nash equilibrium)");
    }
    let _ = writeln!(human, "PoA {}  PoS {}", report.poa, report.pos);
    Ok(Output {
        json,
        human,
        exit_code: 0,
    })
}

pub fn shares(game: &Game, protocol: &Protocol, profile: &str) -> Result<Output, CliError> {
    let model = game.model()?;
    let profile = checked_profile(&model, parse_profile(profile)?)?;
    let loads = model.loads(&profile);
    let mut rows = Vec::new();
    let mut human = String::new();
    let _ = writeln!(human, "{:<12} {:>10}  shares", "resource", "cost");
    for (res, &users) in model.resources().iter().zip(&loads) {
        let cost = res.cost.value(users);
        let shares: Vec<Rational> = if users.is_empty() {
            Vec::new()
        } else {
            protocol.shares(&res.cost, users)?
        };
        let _ = writeln!(
            human,
            "{:<12} {:>10}  {}",
            res.id,
            format_rational(cost),
            shares.iter().map(format_rational).collect::<Vec<_>>().join(" ")
        );
        rows.push(json!({
            "id": res.id,
            "users": users.iter().collect::<Vec<_>>(),
            "cost": r(cost),
            "shares": shares.iter().map(r).collect::<Vec<_>>(),
        }));
    }
    let private: Vec<Value> = (0..model.players())
        .map(|i| private_cost(&model, protocol, &profile, i).map(|c| r(&c)))
        .collect::<Result<_, _>>()?;
    let json = json!({
        "protocol": protocol.name(),
        "profile": profile_json(&profile),
        "resources": rows,
        "private_costs": private,
    });
    Ok(Output {
        json,
        human,
        exit_code: 0,
    })
}

#[derive(Clone, Debug)]
pub struct GadgetArgs {
    pub kind: GadgetKind,
    pub n: usize,
    pub eps: Rational,
    pub a: Rational,
    /// Defaults to `shapley`, or unit weights for `pos_nharmonic`.
    pub protocol: Option<ProtocolArg>,
    pub q_probe_max: Option<Rational>,
}

fn expectation_json(e: &Expectation) -> Value {
    json!({
        "metric": e.metric.name(),
        "relation": match e.relation { Relation::Equal => "=", Relation::AtLeast => ">=" },
        "value": r(&e.value),
        "unique_pne": e.unique_pne,
        "unused_edge": e.unused_edge,
    })
}

pub fn gadget(args: &GadgetArgs, out: Option<&Path>, cfg: &EnumConfig) -> Result<Output, CliError> {
    let players = match args.kind {
        GadgetKind::PoaUnbounded => 2,
        _ => args.n,
    };
    if players == 0 || players > arena_core::MAX_PLAYERS {
        return Err(CliError::Input(format!("n must be in 1..={}", arena_core::MAX_PLAYERS)));
    }
    let default_arg = match args.kind {
        GadgetKind::PosNHarmonic => ProtocolArg::UnitWeights,
        _ => ProtocolArg::Shapley,
    };
    let protocol = args.protocol.as_ref().unwrap_or(&default_arg).resolve(players)?;
    let mut extra = json!({});
    let gadget: Gadget = match args.kind {
        GadgetKind::PosLinear => build_pos_linear_for(args.n, &args.eps, &protocol)?,
        GadgetKind::PosNHarmonic => match &protocol {
            Protocol::WeightedShapley(w) => build_pos_nharmonic(args.n, &args.eps, w)?,
            _ => return Err(CliError::Input("pos_nharmonic needs a gws protocol".into())),
        },
        GadgetKind::PoaUnbounded => {
            let probe = args.q_probe_max.clone().unwrap_or_else(|| default_q_probe_max(&args.a));
            let built = build_poa_unbounded(&args.a, &protocol, &probe)?;
            extra = json!({
                "case": built.case,
                "q": r(&built.q),
                "z": built.z.as_ref().map(|z| z.to_string()),
            });
            built.gadget
        }
    };
    let report = verify_gadget_with(&gadget.network, &gadget.expected, &protocol, cfg)?;
    let game = Game::Network(gadget.network.clone());
    let file = GameFile::from_game(&game);
    if let Some(path) = out {
        std::fs::write(path, file.to_json() + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let mut json = json!({
        "kind": gadget.kind.name(),
        "protocol": protocol.name(),
        "expected": expectation_json(&gadget.expected),
        "measured": ratio(&report.measured),
        "verified": report.verified(),
        "failures": report.failures,
        "pne": report.pne.iter().zip(&report.pne_costs).map(|(p, c)| json!({"profile": profile_json(p), "cost": r(c)})).collect::<Vec<_>>(),
        "optimum_cost": r(&report.optimum_cost),
        "out": out.map(|p| p.display().to_string()),
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
        map.extend(more);
    }
    if out.is_none() {
        json["game"] = serde_json::to_value(&file).expect("game file serializes");
    }

    let mut human = String::new();
    let op = match gadget.expected.relation {
        Relation::Equal => "=",
        Relation::AtLeast => ">=",
    };
    let _ = writeln!(human, "gadget {}  protocol {}", gadget.kind, protocol.name());
    let _ = writeln!(
        human,
        "expected {} {op} {}",
        gadget.expected.metric.name(),
        format_rational(&gadget.expected.value)
    );
    let _ = writeln!(
        human,
        "measured {} = {}",
        gadget.expected.metric.name(),
        report.measured
    );
    let _ = writeln!(human, "equilibria {}", report.pne.len());
    let _ = writeln!(human, "{}", if report.verified() { "verified" } else { "NOT verified" });
    for f in &report.failures {
        let _ = writeln!(human, "  {f}");
    }
    Ok(Output {
        json,
        human,
        exit_code: if report.verified() { 0 } else { 1 },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Start {
    Profile(String),
    Random(u64),
}

impl Start {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text.strip_prefix("random:") {
            Some(seed) => seed
                .parse()
                .map(Start::Random)
                .map_err(|_| CliError::Input(format!("bad random seed in `{text}`"))),
            None => Ok(Start::Profile(text.to_string())),
        }
    }
}

pub fn parse_schedule(text: &str) -> Result<Schedule, CliError> {
    match text {
        "round-robin" => Ok(Schedule::RoundRobin),
        other => other
            .strip_prefix("shuffled:")
            .and_then(|s| s.parse().ok())
            .map(Schedule::Shuffled)
            .ok_or_else(|| CliError::Input(format!("unknown schedule `{text}`; use round-robin or shuffled:<seed>"))),
    }
}

pub fn dynamics(
    game: &Game,
    protocol: &Protocol,
    start: &Start,
    max_steps: Option<usize>,
    schedule: Schedule,
    strict: bool,
) -> Result<Output, CliError> {
    let model = game.model()?;
    let start = match start {
        Start::Profile(text) => checked_profile(&model, parse_profile(text)?)?,
        Start::Random(seed) => random_profile(&mut ChaCha8Rng::seed_from_u64(*seed), &model),
    };
    let max_steps = max_steps.unwrap_or_else(|| default_max_steps(&model));
    let out = best_response_dynamics_with(&model, protocol, &start, max_steps, schedule)?;
    let steps: Vec<Value> = out
        .trace
        .iter()
        .map(|s| {
            json!({
                "player": s.player,
                "from": s.from,
                "to": s.to,
                "cost_before": r(&s.cost_before),
                "cost_after": r(&s.cost_after),
                "delta": r(&(&s.cost_after - &s.cost_before)),
                "potential": s.potential.as_ref().map(r),
            })
        })
        .collect();
    let final_potential = protocol
        .is_shapley()
        .then(|| potential(&model, &out.profile))
        .transpose()?;
    let json = json!({
        "protocol": protocol.name(),
        "start": profile_json(&start),
        "final": profile_json(&out.profile),
        "converged": out.converged,
        "sweeps": out.sweeps,
        "max_steps": max_steps,
        "initial_potential": out.initial_potential.as_ref().map(r),
        "final_potential": final_potential.as_ref().map(r),
        "steps": steps,
    });

    let mut human = String::new();
    let _ = writeln!(human, "start {:?}", start.choices());
    if let Some(phi) = &out.initial_potential {
        let _ = writeln!(human, "potential {}", format_rational(phi));
    }
    for s in &out.trace {
        let _ = write!(
            human,
            "player {} {} -> {}  cost {} -> {}",
            s.player,
            s.from,
            s.to,
            format_rational(&s.cost_before),
            format_rational(&s.cost_after)
        );
        if let Some(phi) = &s.potential {
            let _ = write!(human, "  potential {}", format_rational(phi));
        }
        human.push('\n');
    }
    let verdict = if out.converged {
        "converged"
    } else {
        "step limit reached"
    };
    let _ = writeln!(
        human,
        "{verdict} at {:?} after {} changes",
        out.profile.choices(),
        out.trace.len()
    );
    Ok(Output {
        json,
        human,
        exit_code: if strict && !out.converged { 3 } else { 0 },
    })
}

pub fn verify_bounds(seed: u64, count: usize, class: Option<CostClass>, cfg: &EnumConfig) -> Result<Output, CliError> {
    let (games, suites): (_, &[Suite]) = match class {
        Some(c) => (corpus_of_class(seed, count, c)?, Suite::for_class(c)),
        None => (corpus(seed, count)?, &Suite::ALL),
    };
    let results = run_bound_suites(&games, suites, cfg)?;
    let mut human = String::new();
    let mut all_passed = true;
    let json_suites: Vec<Value> = results
        .iter()
        .map(|res| {
            all_passed &= res.passed();
            let _ = writeln!(
                human,
                "{:<18} checked {:>4}  violations {}",
                res.suite.name(),
                res.checked,
                res.violations.len()
            );
            for v in &res.violations {
                let _ = writeln!(
                    human,
                    "  game {} (n={}): {} > {}",
                    v.game,
                    v.players,
                    v.measured,
                    format_rational(&v.bound)
                );
            }
            json!({
                "suite": res.suite.name(),
                "checked": res.checked,
                "violations": res.violations.iter().map(|v| json!({
                    "game": v.game,
                    "players": v.players,
                    "measured": ratio(&v.measured),
                    "bound": r(&v.bound),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let json = json!({
        "seed": seed,
        "count": count,
        "class": class.map(|c| c.name()),
        "suites": json_suites,
        "passed": all_passed,
    });
    Ok(Output {
        json,
        human,
        exit_code: if all_passed { 0 } else { 1 },
    })
}
