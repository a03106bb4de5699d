//! MILP construction for one (topology, demands, features) instance.

use serde::{Deserialize, Serialize};

use crate::milp::{MilpProblem, Sense, VarId, VarKind};
use crate::network::{Demand, Topology};

use super::config::{FeatureConfig, Modulation, Regeneration};
use super::{ModelError, VariableLayout};

/// Constants derived from the instance and reused by extraction, fixing and
/// the verifier.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelConstants {
    /// Upper bound on any start frequency (worst-case stacking incl. guards).
    pub spectrum_cap: f64,
    /// Big-M for frequency-difference constraints; `spectrum_cap` plus the
    /// widest single channel so deactivated rows can never bind.
    pub big_m_spectrum: f64,
    /// Global reach big-M: the largest reach any demand can attain, >= 0.
    pub reach_max: f64,
    /// `(1/eta_max, 1/eta_min)`.
    pub inv_eta_lo: f64,
    pub inv_eta_hi: f64,
    /// Per-demand constant bandwidth when modulation is fixed.
    pub bandwidth_fixed: Vec<f64>,
    /// Per-demand reach constant `alpha/b + gamma` (the part independent of
    /// spectral efficiency).
    pub reach_const: Vec<f64>,
    /// Per-demand maximum reach `alpha/b + beta/eta_min + gamma`.
    pub reach_hi: Vec<f64>,
    /// Per-demand minimum reach over the allowed efficiency range.
    pub reach_lo: Vec<f64>,
    pub guard_band: f64,
}

struct Ctx<'a> {
    topology: &'a Topology,
    demands: &'a [Demand],
    config: &'a FeatureConfig,
    k: ModelConstants,
    optimized: bool,
    preselected: Vec<usize>,
    reach_on: bool,
    wc: bool,
    mc: bool,
    fixed_mod: bool,
    need_i_nsd: bool,
}

/// Builds the MILP and the role-to-variable index for one instance.
pub fn build(
    topology: &Topology,
    demands: &[Demand],
    config: &FeatureConfig,
) -> Result<(MilpProblem, VariableLayout), ModelError> {
    config.validate(topology)?;
    let (inv_lo, inv_hi) = config.modulation.inv_eta_bounds();
    let reach = &config.reach;
    let g = config.guard_band_ghz;

    let bandwidth_hi: Vec<f64> = demands.iter().map(|d| d.rate_gbps * inv_hi).collect();
    let max_bw = bandwidth_hi.iter().fold(0.0_f64, |a, &b| a.max(b));
    let spectrum_cap = bandwidth_hi.iter().sum::<f64>() + g * demands.len() as f64;
    let big_m_spectrum = spectrum_cap + max_bw;

    let reach_const: Vec<f64> = demands
        .iter()
        .map(|d| reach.alpha / d.rate_gbps + reach.gamma)
        .collect();
    let reach_hi: Vec<f64> = reach_const.iter().map(|rc| rc + reach.beta * inv_hi).collect();
    let reach_lo: Vec<f64> = reach_const.iter().map(|rc| rc + reach.beta * inv_lo).collect();
    let reach_max = reach_hi.iter().fold(0.0_f64, |a, &b| a.max(b));

    let k = ModelConstants {
        spectrum_cap,
        big_m_spectrum,
        reach_max,
        inv_eta_lo: inv_lo,
        inv_eta_hi: inv_hi,
        bandwidth_fixed: if config.modulation.is_fixed() {
            bandwidth_hi.clone()
        } else {
            Vec::new()
        },
        reach_const,
        reach_hi,
        reach_lo,
        guard_band: g,
    };

    let optimized = matches!(config.regeneration, Regeneration::Optimized);
    let preselected = config.preselected_nodes(topology);
    let reach_on = config.regeneration.active();
    let wc = config.wavelength_conversion;
    let mc = config.modulation_conversion;
    let need_i_nsd = optimized
        || (reach_on && !optimized && (wc || mc || config.circuit_cap.is_some()));

    let ctx = Ctx {
        topology,
        demands,
        config,
        k,
        optimized,
        preselected,
        reach_on,
        wc,
        mc,
        fixed_mod: config.modulation.is_fixed(),
        need_i_nsd,
    };

    let mut problem = MilpProblem::new(format!(
        "eon_{}n_{}l_{}d",
        topology.node_count(),
        topology.link_count(),
        demands.len()
    ));
    let mut layout = add_variables(&mut problem, &ctx)?;
    add_constraints(&mut problem, &ctx, &layout)?;
    set_objective(&mut problem, &ctx, &layout)?;
    layout.constants = ctx.k;
    layout.demand_count = demands.len();
    layout.preselected = ctx.preselected.clone();
    Ok((problem, layout))
}

fn add_variables(p: &mut MilpProblem, ctx: &Ctx) -> Result<VariableLayout, ModelError> {
    let nd = ctx.demands.len();
    let nl = ctx.topology.link_count();
    let nn = ctx.topology.node_count();
    let k = &ctx.k;
    let mut layout = VariableLayout::default();

    layout.c = p.add_variable("c", VarKind::Continuous, 0.0, k.big_m_spectrum)?;

    if ctx.wc {
        for a in 0..nd {
            let mut row = Vec::with_capacity(nl);
            for l in 0..nl {
                row.push(p.add_variable(
                    format!("F_d{a}_l{l}"),
                    VarKind::Continuous,
                    0.0,
                    k.spectrum_cap,
                )?);
            }
            layout.f_link.push(row);
        }
    } else {
        for a in 0..nd {
            layout.f_demand.push(p.add_variable(
                format!("F_d{a}"),
                VarKind::Continuous,
                0.0,
                k.spectrum_cap,
            )?);
        }
    }

    if !ctx.fixed_mod {
        if ctx.mc {
            for a in 0..nd {
                let mut row = Vec::with_capacity(nl);
                for l in 0..nl {
                    row.push(p.add_variable(
                        format!("inveta_d{a}_l{l}"),
                        VarKind::Continuous,
                        0.0,
                        k.inv_eta_hi,
                    )?);
                }
                layout.inv_eta_link.push(row);
            }
        } else {
            for a in 0..nd {
                layout.inv_eta_demand.push(p.add_variable(
                    format!("inveta_d{a}"),
                    VarKind::Continuous,
                    k.inv_eta_lo,
                    k.inv_eta_hi,
                )?);
            }
        }
    } else if ctx.mc {
        // Fixed modulation with conversion enabled still keeps the per-link
        // efficiency pinned to the single value on used links.
        for a in 0..nd {
            let mut row = Vec::with_capacity(nl);
            for l in 0..nl {
                row.push(p.add_variable(
                    format!("inveta_d{a}_l{l}"),
                    VarKind::Continuous,
                    0.0,
                    k.inv_eta_hi,
                )?);
            }
            layout.inv_eta_link.push(row);
        }
    }

    for a in 0..nd {
        let mut row = Vec::with_capacity(nl);
        for l in 0..nl {
            row.push(p.add_variable(format!("V_l{l}_d{a}"), VarKind::Binary, 0.0, 1.0)?);
        }
        layout.v.push(row);
    }

    if ctx.wc {
        for l in 0..nl {
            for a in 0..nd {
                for b in (a + 1)..nd {
                    let id = p.add_variable(
                        format!("delta_l{l}_d{a}_d{b}"),
                        VarKind::Binary,
                        0.0,
                        1.0,
                    )?;
                    layout.delta_link_pair.insert((l, a, b), id);
                }
            }
        }
    } else {
        for a in 0..nd {
            let mut row = Vec::with_capacity(nd);
            for b in 0..nd {
                row.push(p.add_variable(
                    format!("delta_d{a}_d{b}"),
                    VarKind::Binary,
                    0.0,
                    1.0,
                )?);
            }
            layout.delta_pair.push(row);
        }
    }

    if ctx.reach_on {
        let ycap = k.reach_max.max(0.0);
        for a in 0..nd {
            let mut row = Vec::with_capacity(nn);
            for n in 0..nn {
                row.push(p.add_variable(
                    format!("Y_n{n}_d{a}"),
                    VarKind::Continuous,
                    0.0,
                    ycap,
                )?);
            }
            layout.y.push(row);
        }
        for a in 0..nd {
            let mut row = Vec::with_capacity(nl);
            for l in 0..nl {
                row.push(p.add_variable(
                    format!("U_l{l}_d{a}"),
                    VarKind::Continuous,
                    0.0,
                    ycap,
                )?);
            }
            layout.u.push(row);
        }
        if !ctx.fixed_mod {
            for a in 0..nd {
                let lo = if ctx.mc {
                    // With the link unused the product is zero and the reach
                    // expression itself may be negative.
                    k.reach_lo[a].min(0.0).min(k.reach_const[a].min(0.0))
                } else {
                    k.reach_lo[a].min(0.0)
                };
                let mut row = Vec::with_capacity(nl);
                for l in 0..nl {
                    row.push(p.add_variable(
                        format!("W_l{l}_d{a}"),
                        VarKind::Continuous,
                        lo,
                        k.reach_hi[a].max(0.0),
                    )?);
                }
                layout.w.push(row);
            }
        }
        if ctx.optimized {
            for a in 0..nd {
                let mut row = Vec::with_capacity(nl);
                for l in 0..nl {
                    row.push(p.add_variable(
                        format!("X_l{l}_d{a}"),
                        VarKind::Continuous,
                        0.0,
                        ycap,
                    )?);
                }
                layout.x.push(row);
            }
            for n in 0..nn {
                layout
                    .i_node
                    .push(p.add_variable(format!("I_n{n}"), VarKind::Binary, 0.0, 1.0)?);
            }
        }
        if ctx.need_i_nsd {
            for a in 0..nd {
                let d = &ctx.demands[a];
                let mut row = Vec::with_capacity(nn);
                for n in 0..nn {
                    // 3R regeneration happens at intermediate nodes only.
                    let endpoint = n == d.source || n == d.target;
                    let allowed = !endpoint
                        && (ctx.optimized || ctx.preselected.binary_search(&n).is_ok());
                    let ub = if allowed { 1.0 } else { 0.0 };
                    row.push(p.add_variable(
                        format!("I_n{n}_d{a}"),
                        VarKind::Binary,
                        0.0,
                        ub,
                    )?);
                }
                layout.i_node_demand.push(row);
            }
        }
        if ctx.config.circuit_cap.is_some() {
            for n in 0..nn {
                layout.circuits.push(p.add_variable(
                    format!("Ncirc_n{n}"),
                    VarKind::Integer,
                    0.0,
                    nd as f64,
                )?);
            }
        }
    }

    Ok(layout)
}

fn add_constraints(p: &mut MilpProblem, ctx: &Ctx, lay: &VariableLayout) -> Result<(), ModelError> {
    let nd = ctx.demands.len();
    let nl = ctx.topology.link_count();
    let nn = ctx.topology.node_count();
    let k = &ctx.k;
    let t_m = k.big_m_spectrum;
    let g = k.guard_band;

    // Bandwidth of demand `a` as (terms, constant): b * inveta or a constant.
    let bandwidth = |a: usize, link: usize| -> (Vec<(VarId, f64)>, f64) {
        let rate = ctx.demands[a].rate_gbps;
        if ctx.fixed_mod && !ctx.mc {
            (Vec::new(), k.bandwidth_fixed[a])
        } else if ctx.mc {
            (vec![(lay.inv_eta_link[a][link], rate)], 0.0)
        } else {
            (vec![(lay.inv_eta_demand[a], rate)], 0.0)
        }
    };

    // (a) spectrum roof.
    if ctx.wc || ctx.mc {
        for a in 0..nd {
            for l in 0..nl {
                let f_term: (VarId, f64) = if ctx.wc {
                    (lay.f_link[a][l], -1.0)
                } else {
                    (lay.f_demand[a], -1.0)
                };
                let (bw_terms, bw_const) = bandwidth(a, l);
                let mut terms = vec![(lay.c, 1.0), f_term, (lay.v[a][l], -t_m)];
                for (var, coeff) in bw_terms {
                    terms.push((var, -coeff));
                }
                p.add_constraint(
                    format!("roof_l{l}_d{a}"),
                    terms,
                    Sense::Ge,
                    bw_const - t_m,
                )?;
            }
        }
    } else {
        for a in 0..nd {
            let (bw_terms, bw_const) = bandwidth(a, 0);
            let mut terms = vec![(lay.c, 1.0), (lay.f_demand[a], -1.0)];
            for (var, coeff) in bw_terms {
                terms.push((var, -coeff));
            }
            p.add_constraint(format!("roof_d{a}"), terms, Sense::Ge, bw_const)?;
        }
    }

    // (b) flow conservation.
    for a in 0..nd {
        let d = &ctx.demands[a];
        for n in 0..nn {
            let mut terms = Vec::new();
            for link in ctx.topology.incoming(n) {
                terms.push((lay.v[a][link.id], 1.0));
            }
            for link in ctx.topology.outgoing(n) {
                terms.push((lay.v[a][link.id], -1.0));
            }
            let s = if n == d.source {
                -1.0
            } else if n == d.target {
                1.0
            } else {
                0.0
            };
            p.add_constraint(format!("flow_n{n}_d{a}"), terms, Sense::Eq, s)?;
        }
    }

    // (c) non-overlap triples.
    if ctx.wc {
        for l in 0..nl {
            for a in 0..nd {
                for b in (a + 1)..nd {
                    let delta = lay.delta_link_pair[&(l, a, b)];
                    for (lo_d, hi_d, flip) in [(a, b, false), (b, a, true)] {
                        // delta encodes "F of `a` is below F of `b`"; the
                        // reversed direction uses its complement.
                        let dcoef = if flip { -1.0 } else { 1.0 };
                        let dconst = if flip { 1.0 } else { 0.0 };
                        let base = vec![
                            (lay.f_link[lo_d][l], 1.0),
                            (lay.f_link[hi_d][l], -1.0),
                            (lay.v[a][l], t_m),
                            (lay.v[b][l], t_m),
                            (delta, t_m * dcoef),
                        ];
                        p.add_constraint(
                            format!("sep_lo_l{l}_d{lo_d}_d{hi_d}"),
                            base,
                            Sense::Le,
                            t_m * (3.0 - dconst),
                        )?;
                        let (bw_terms, bw_const) = bandwidth(lo_d, l);
                        let mg = t_m + g;
                        let mut terms = vec![
                            (lay.f_link[lo_d][l], 1.0),
                            (lay.f_link[hi_d][l], -1.0),
                            (lay.v[a][l], mg),
                            (lay.v[b][l], mg),
                            (delta, mg * dcoef),
                        ];
                        for (var, coeff) in bw_terms {
                            terms.push((var, coeff));
                        }
                        p.add_constraint(
                            format!("sep_gap_l{l}_d{lo_d}_d{hi_d}"),
                            terms,
                            Sense::Le,
                            mg * (3.0 - dconst) - g - bw_const,
                        )?;
                    }
                }
            }
        }
    } else {
        for a in 0..nd {
            for b in 0..nd {
                if a == b {
                    p.add_constraint(
                        format!("ord_d{a}_d{b}"),
                        vec![(lay.delta_pair[a][b], 1.0)],
                        Sense::Eq,
                        0.0,
                    )?;
                } else {
                    p.add_constraint(
                        format!("ord_d{a}_d{b}"),
                        vec![(lay.delta_pair[a][b], 1.0), (lay.delta_pair[b][a], 1.0)],
                        Sense::Eq,
                        1.0,
                    )?;
                }
                for l in 0..nl {
                    let f_a: (VarId, f64) = (lay.f_demand[a], 1.0);
                    let f_b: (VarId, f64) = (lay.f_demand[b], -1.0);
                    p.add_constraint(
                        format!("sep_lo_l{l}_d{a}_d{b}"),
                        vec![
                            f_a,
                            f_b,
                            (lay.delta_pair[a][b], t_m),
                            (lay.v[a][l], t_m),
                            (lay.v[b][l], t_m),
                        ],
                        Sense::Le,
                        3.0 * t_m,
                    )?;
                    let (bw_terms, bw_const) = bandwidth(a, l);
                    let mg = t_m + g;
                    let mut terms = vec![
                        f_a,
                        f_b,
                        (lay.delta_pair[a][b], mg),
                        (lay.v[a][l], mg),
                        (lay.v[b][l], mg),
                    ];
                    for (var, coeff) in bw_terms {
                        terms.push((var, coeff));
                    }
                    p.add_constraint(
                        format!("sep_gap_l{l}_d{a}_d{b}"),
                        terms,
                        Sense::Le,
                        3.0 * mg - g - bw_const,
                    )?;
                }
            }
        }
    }

    // (d) multi-modulation bounds live on the variables themselves.

    if ctx.reach_on {
        // Reach expression for demand a on link l: reach_const + beta * inveta.
        let beta = ctx.config.reach.beta;
        let ieta_var = |a: usize, l: usize| -> Option<VarId> {
            if ctx.fixed_mod && !ctx.mc {
                None
            } else if ctx.mc {
                Some(lay.inv_eta_link[a][l])
            } else {
                Some(lay.inv_eta_demand[a])
            }
        };

        // (e) reach constraints per (demand, link) plus the product
        // linearization where the reach is variable.
        for a in 0..nd {
            let rc = k.reach_const[a];
            for l in 0..nl {
                let u = lay.u[a][l];
                let v = lay.v[a][l];
                if ctx.fixed_mod && !ctx.mc {
                    // Constant reach: U <= R * V.
                    let r = rc + beta * k.inv_eta_hi;
                    p.add_constraint(
                        format!("reach_link_l{l}_d{a}"),
                        vec![(u, 1.0), (v, -r)],
                        Sense::Le,
                        0.0,
                    )?;
                } else {
                    let w = lay.w[a][l];
                    let ieta = ieta_var(a, l).expect("variable modulation");
                    // Box of the reach expression over all feasible points.
                    let (r_lo, r_hi) = if ctx.mc {
                        (k.reach_lo[a].min(rc), k.reach_hi[a])
                    } else {
                        (k.reach_lo[a], k.reach_hi[a])
                    };
                    p.add_constraint(
                        format!("reach_link_l{l}_d{a}"),
                        vec![(u, 1.0), (w, -1.0)],
                        Sense::Le,
                        0.0,
                    )?;
                    p.add_constraint(
                        format!("wlin_ub_l{l}_d{a}"),
                        vec![(w, 1.0), (v, -r_hi)],
                        Sense::Le,
                        0.0,
                    )?;
                    p.add_constraint(
                        format!("wlin_lb_l{l}_d{a}"),
                        vec![(w, 1.0), (v, -r_lo)],
                        Sense::Ge,
                        0.0,
                    )?;
                    // W <= R - r_lo (1 - V) and W >= R - r_hi (1 - V).
                    p.add_constraint(
                        format!("wlin_cap_l{l}_d{a}"),
                        vec![(w, 1.0), (ieta, -beta), (v, -r_lo)],
                        Sense::Le,
                        rc - r_lo,
                    )?;
                    p.add_constraint(
                        format!("wlin_floor_l{l}_d{a}"),
                        vec![(w, 1.0), (ieta, -beta), (v, -r_hi)],
                        Sense::Ge,
                        rc - r_hi,
                    )?;
                }
                // U <= Y at the link's source node.
                let src = ctx.topology.link(l).source;
                p.add_constraint(
                    format!("reach_mono_l{l}_d{a}"),
                    vec![(u, 1.0), (lay.y[a][src], -1.0)],
                    Sense::Le,
                    0.0,
                )?;
                // Y_i - U <= R (1 - V).
                if ctx.fixed_mod && !ctx.mc {
                    let r = rc + beta * k.inv_eta_hi;
                    p.add_constraint(
                        format!("reach_reset_l{l}_d{a}"),
                        vec![(lay.y[a][src], 1.0), (u, -1.0), (v, r)],
                        Sense::Le,
                        r,
                    )?;
                } else if ctx.mc {
                    // The per-link reach expression collapses when the link
                    // is unused, so relax with the demand's maximum reach.
                    let m10 = k.reach_hi[a].max(0.0);
                    p.add_constraint(
                        format!("reach_reset_l{l}_d{a}"),
                        vec![(lay.y[a][src], 1.0), (u, -1.0), (v, m10)],
                        Sense::Le,
                        m10,
                    )?;
                } else {
                    // Y - U <= R - W with R affine in the demand efficiency.
                    let ieta = lay.inv_eta_demand[a];
                    p.add_constraint(
                        format!("reach_reset_l{l}_d{a}"),
                        vec![
                            (lay.y[a][src], 1.0),
                            (u, -1.0),
                            (lay.w[a][l], 1.0),
                            (ieta, -beta),
                        ],
                        Sense::Le,
                        rc,
                    )?;
                }
            }
            // Y_n <= R at every node.
            for n in 0..nn {
                if ctx.fixed_mod && !ctx.mc {
                    let r = rc + beta * k.inv_eta_hi;
                    p.add_constraint(
                        format!("ycap_n{n}_d{a}"),
                        vec![(lay.y[a][n], 1.0)],
                        Sense::Le,
                        r,
                    )?;
                } else if ctx.mc {
                    // Reach of the segment ending at n uses the efficiency of
                    // the incoming used link; relax fully when none is used.
                    let k_relax = (-rc).max(0.0);
                    let mut terms = vec![(lay.y[a][n], 1.0)];
                    for link in ctx.topology.incoming(n) {
                        terms.push((lay.inv_eta_link[a][link.id], -beta));
                        terms.push((lay.v[a][link.id], k_relax));
                    }
                    p.add_constraint(format!("ycap_n{n}_d{a}"), terms, Sense::Le, rc + k_relax)?;
                } else {
                    p.add_constraint(
                        format!("ycap_n{n}_d{a}"),
                        vec![(lay.y[a][n], 1.0), (lay.inv_eta_demand[a], -beta)],
                        Sense::Le,
                        rc,
                    )?;
                }
            }
        }

        // (f) segment-distance accumulation.
        for a in 0..nd {
            for n in 0..nn {
                let mut terms = vec![(lay.y[a][n], 1.0)];
                for link in ctx.topology.incoming(n) {
                    terms.push((lay.v[a][link.id], -link.length_km));
                    if ctx.optimized {
                        terms.push((lay.x[a][link.id], -1.0));
                    } else if ctx.preselected.binary_search(&link.source).is_err() {
                        terms.push((lay.u[a][link.id], -1.0));
                    }
                }
                p.add_constraint(format!("ydef_n{n}_d{a}"), terms, Sense::Eq, 0.0)?;
            }
            if ctx.optimized {
                let m = k.reach_max.max(0.0);
                for l in 0..nl {
                    let src = ctx.topology.link(l).source;
                    let x = lay.x[a][l];
                    let u = lay.u[a][l];
                    let i = lay.i_node_demand[a][src];
                    p.add_constraint(
                        format!("xlin_le_u_l{l}_d{a}"),
                        vec![(x, 1.0), (u, -1.0)],
                        Sense::Le,
                        0.0,
                    )?;
                    p.add_constraint(
                        format!("xlin_ge_u_l{l}_d{a}"),
                        vec![(x, 1.0), (u, -1.0), (i, m)],
                        Sense::Ge,
                        0.0,
                    )?;
                    p.add_constraint(
                        format!("xlin_cap_l{l}_d{a}"),
                        vec![(x, 1.0), (i, m)],
                        Sense::Le,
                        m,
                    )?;
                }
            }
        }

        // (g) regeneration coupling.
        if ctx.optimized {
            for a in 0..nd {
                for n in 0..nn {
                    p.add_constraint(
                        format!("circ_node_n{n}_d{a}"),
                        vec![(lay.i_node_demand[a][n], 1.0), (lay.i_node[n], -1.0)],
                        Sense::Le,
                        0.0,
                    )?;
                    let mut terms = vec![(lay.i_node_demand[a][n], 1.0)];
                    for link in ctx.topology.incoming(n) {
                        terms.push((lay.v[a][link.id], -1.0));
                    }
                    p.add_constraint(format!("circ_path_n{n}_d{a}"), terms, Sense::Le, 0.0)?;
                }
            }
        } else if ctx.need_i_nsd {
            // Preselected semantics: a demand crossing a regeneration node is
            // regenerated there.
            for a in 0..nd {
                let d = &ctx.demands[a];
                for &n in &ctx.preselected {
                    if n == d.source || n == d.target {
                        continue;
                    }
                    let mut terms = vec![(lay.i_node_demand[a][n], 1.0)];
                    for link in ctx.topology.incoming(n) {
                        terms.push((lay.v[a][link.id], -1.0));
                    }
                    p.add_constraint(format!("regen_set_n{n}_d{a}"), terms, Sense::Eq, 0.0)?;
                }
            }
        }

        // (h) circuit caps.
        if let Some(cap) = ctx.config.circuit_cap {
            for n in 0..nn {
                let mut terms = vec![(lay.circuits[n], 1.0)];
                for a in 0..nd {
                    terms.push((lay.i_node_demand[a][n], -1.0));
                }
                p.add_constraint(format!("ncirc_def_n{n}"), terms, Sense::Eq, 0.0)?;
                if ctx.optimized {
                    p.add_constraint(
                        format!("ncirc_cap_n{n}"),
                        vec![(lay.i_node[n], cap as f64), (lay.circuits[n], -1.0)],
                        Sense::Ge,
                        0.0,
                    )?;
                } else {
                    let allowed = if ctx.preselected.binary_search(&n).is_ok() {
                        cap as f64
                    } else {
                        0.0
                    };
                    p.add_constraint(
                        format!("ncirc_cap_n{n}"),
                        vec![(lay.circuits[n], 1.0)],
                        Sense::Le,
                        allowed,
                    )?;
                }
            }
        }

        // (i) wavelength-conversion continuity plus unused-link pinning.
        if ctx.wc {
            for a in 0..nd {
                let d = &ctx.demands[a];
                for n in 0..nn {
                    let s_abs = if n == d.source || n == d.target { 1.0 } else { 0.0 };
                    let mut flow: Vec<(VarId, f64)> = Vec::new();
                    for link in ctx.topology.incoming(n) {
                        flow.push((lay.f_link[a][link.id], 1.0));
                    }
                    for link in ctx.topology.outgoing(n) {
                        flow.push((lay.f_link[a][link.id], -1.0));
                    }
                    let i = lay.i_node_demand[a][n];
                    let mut hi = flow.clone();
                    hi.push((i, -t_m));
                    p.add_constraint(format!("fcont_hi_n{n}_d{a}"), hi, Sense::Le, t_m * s_abs)?;
                    let mut lo = flow;
                    lo.push((i, t_m));
                    p.add_constraint(format!("fcont_lo_n{n}_d{a}"), lo, Sense::Ge, -t_m * s_abs)?;
                }
                for l in 0..nl {
                    p.add_constraint(
                        format!("fpin_l{l}_d{a}"),
                        vec![(lay.f_link[a][l], 1.0), (lay.v[a][l], -t_m)],
                        Sense::Le,
                        0.0,
                    )?;
                }
            }
        }

        // (j) modulation-conversion continuity plus per-link efficiency gates.
        if ctx.mc {
            let hi = k.inv_eta_hi;
            let lo_b = k.inv_eta_lo;
            for a in 0..nd {
                let d = &ctx.demands[a];
                for n in 0..nn {
                    let s_abs = if n == d.source || n == d.target { 1.0 } else { 0.0 };
                    let mut flow: Vec<(VarId, f64)> = Vec::new();
                    for link in ctx.topology.incoming(n) {
                        flow.push((lay.inv_eta_link[a][link.id], 1.0));
                    }
                    for link in ctx.topology.outgoing(n) {
                        flow.push((lay.inv_eta_link[a][link.id], -1.0));
                    }
                    let i = lay.i_node_demand[a][n];
                    let mut hi_row = flow.clone();
                    hi_row.push((i, -hi));
                    p.add_constraint(
                        format!("econt_hi_n{n}_d{a}"),
                        hi_row,
                        Sense::Le,
                        hi * s_abs,
                    )?;
                    let mut lo_row = flow;
                    lo_row.push((i, hi));
                    p.add_constraint(
                        format!("econt_lo_n{n}_d{a}"),
                        lo_row,
                        Sense::Ge,
                        -hi * s_abs,
                    )?;
                }
                for l in 0..nl {
                    p.add_constraint(
                        format!("epin_hi_l{l}_d{a}"),
                        vec![(lay.inv_eta_link[a][l], 1.0), (lay.v[a][l], -hi)],
                        Sense::Le,
                        0.0,
                    )?;
                    p.add_constraint(
                        format!("epin_lo_l{l}_d{a}"),
                        vec![(lay.inv_eta_link[a][l], 1.0), (lay.v[a][l], -lo_b)],
                        Sense::Ge,
                        0.0,
                    )?;
                }
            }
        }
    }

    Ok(())
}

fn set_objective(p: &mut MilpProblem, ctx: &Ctx, lay: &VariableLayout) -> Result<(), ModelError> {
    let a = ctx.config.objective_coefficient;
    let mut terms = vec![(lay.c, a)];
    if ctx.optimized {
        for &i in &lay.i_node {
            terms.push((i, 1.0 - a));
        }
    }
    p.set_objective(terms)?;
    Ok(())
}
