use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::CliError;
use crate::coupled::ContractionReport;
use crate::fem::MeshModel;
use crate::rate::{nodal_tractions, ExternalLoad, RateProblem, RateTrajectory};
use crate::state::StateTrajectory;

pub const TRAJECTORY_HEADER: [&str; 6] = ["step", "time", "node", "component", "velocity", "displacement"];
pub const CONTACT_HEADER: [&str; 5] = ["step", "time", "node", "slip_rate", "traction"];
pub const STATE_HEADER: [&str; 5] = ["step", "time", "node", "alpha", "slip_rate_input"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>, CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    Ok(w)
}

/// Every vertex and component per step; constrained dofs are written as zero.
pub fn write_trajectory_csv(path: &Path, mesh: &MeshModel, traj: &RateTrajectory) -> Result<(), CliError> {
    let mut w = writer(path, &TRAJECTORY_HEADER)?;
    for (n, (v, u)) in traj.velocities.iter().zip(&traj.displacements).enumerate() {
        let step = (traj.grid.start_step + n).to_string();
        let time = traj.times[n].to_string();
        for (vertex, dofs) in mesh.dof_map().iter().enumerate() {
            for (c, dof) in dofs.iter().enumerate() {
                let (vel, disp) = dof.map_or((0.0, 0.0), |i| (v[i], u[i]));
                w.write_record([&step, &time, &vertex.to_string(), &c.to_string(), &vel.to_string(), &disp.to_string()])
                    .map_err(|e| io_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Slip rate and friction traction per contact node for every solved step.
pub fn write_contact_csv(
    path: &Path,
    problem: &RateProblem<'_>,
    traj: &RateTrajectory,
    load: &ExternalLoad,
) -> Result<(), CliError> {
    let mut w = writer(path, &CONTACT_HEADER)?;
    let contact = &problem.ops().contact;
    for n in 0..traj.grid.steps {
        let tractions = nodal_tractions(problem, traj, load, n);
        let slip = contact.slip_rates(&traj.velocities[n + 1]);
        let step = (traj.grid.start_step + n + 1).to_string();
        let time = traj.times[n + 1].to_string();
        for (k, vertex) in contact.vertices.iter().enumerate() {
            w.write_record([&step, &time, &vertex.to_string(), &slip[k].to_string(), &tractions[k].to_string()])
                .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// State per contact node with the slip rate that produced it.
pub fn write_state_csv(
    path: &Path,
    problem: &RateProblem<'_>,
    rate: &RateTrajectory,
    state: &StateTrajectory,
) -> Result<(), CliError> {
    let mut w = writer(path, &STATE_HEADER)?;
    let contact = &problem.ops().contact;
    for (n, alpha) in state.alpha.iter().enumerate() {
        let slip = contact.slip_rates(&rate.velocities[n]);
        let step = (state.grid.start_step + n).to_string();
        let time = state.times[n].to_string();
        for (k, vertex) in contact.vertices.iter().enumerate() {
            w.write_record([&step, &time, &vertex.to_string(), &alpha[k].to_string(), &slip[k].to_string()])
                .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(|e| io_err(path, e))
}

pub fn write_reports(dir: &Path, reports: &[ContractionReport]) -> Result<(), CliError> {
    for (k, report) in reports.iter().enumerate() {
        write_json(&dir.join(format!("contraction_window_{k:03}.json")), report)?;
    }
    Ok(())
}
