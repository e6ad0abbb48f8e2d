"""Numba update kernels for the staggered-grid leapfrog solver.

Field array layout (nx, ny, nz = cell counts):

    Ex (nx,   ny+1, nz+1)   on x-directed edges
    Ey (nx+1, ny,   nz+1)
    Ez (nx+1, ny+1, nz)
    Hx (nx+1, ny+2, nz+2)   face-normal components, padded with one ghost
    Hy (nx+2, ny+1, nz+2)   layer of permanent zeros on the two transverse
    Hz (nx+2, ny+2, nz+1)   axes (physical index + 1)

The ghost zeros let every tangential E component, including the ones on
the domain faces, be updated by the same stencil: a missing outside H is
read as zero, which is exactly the magnetic-wall (PMC) truncation.  PEC
faces and PEC material edges are realized by zeroed update coefficients.

Absorbing boundaries use the convolutional PML recursion with per-axis
profile vectors (b, c) that are zero outside the PML slabs; the psi
accumulators stay identically zero wherever c is zero, so the kernels
skip whole loop planes by testing c.
"""

import numba
import numpy as np

F32 = np.float32

_JIT = dict(cache=True, fastmath=False, boundscheck=False)


@numba.njit(**_JIT)
def update_e(Ex, Ey, Ez, Hx, Hy, Hz, cax, cbx, cay, cby, caz, cbz, ivxd, ivyd, ivzd):
    nx = Ex.shape[0]
    ny = Ey.shape[1]
    nz = Ez.shape[2]
    for i in range(nx):
        for j in range(ny + 1):
            for k in range(nz + 1):
                curl = (Hz[i + 1, j + 1, k] - Hz[i + 1, j, k]) * ivyd[j] - (
                    Hy[i + 1, j, k + 1] - Hy[i + 1, j, k]
                ) * ivzd[k]
                Ex[i, j, k] = cax[i, j, k] * Ex[i, j, k] + cbx[i, j, k] * curl
    for i in range(nx + 1):
        for j in range(ny):
            for k in range(nz + 1):
                curl = (Hx[i, j + 1, k + 1] - Hx[i, j + 1, k]) * ivzd[k] - (
                    Hz[i + 1, j + 1, k] - Hz[i, j + 1, k]
                ) * ivxd[i]
                Ey[i, j, k] = cay[i, j, k] * Ey[i, j, k] + cby[i, j, k] * curl
    for i in range(nx + 1):
        for j in range(ny + 1):
            for k in range(nz):
                curl = (Hy[i + 1, j, k + 1] - Hy[i, j, k + 1]) * ivxd[i] - (
                    Hx[i, j + 1, k + 1] - Hx[i, j, k + 1]
                ) * ivyd[j]
                Ez[i, j, k] = caz[i, j, k] * Ez[i, j, k] + cbz[i, j, k] * curl


@numba.njit(**_JIT)
def update_h(Ex, Ey, Ez, Hx, Hy, Hz, ch, ivx, ivy, ivz):
    nx = Ex.shape[0]
    ny = Ey.shape[1]
    nz = Ez.shape[2]
    for i in range(nx + 1):
        for j in range(ny):
            for k in range(nz):
                Hx[i, j + 1, k + 1] -= ch * (
                    (Ez[i, j + 1, k] - Ez[i, j, k]) * ivy[j]
                    - (Ey[i, j, k + 1] - Ey[i, j, k]) * ivz[k]
                )
    for i in range(nx):
        for j in range(ny + 1):
            for k in range(nz):
                Hy[i + 1, j, k + 1] -= ch * (
                    (Ex[i, j, k + 1] - Ex[i, j, k]) * ivz[k]
                    - (Ez[i + 1, j, k] - Ez[i, j, k]) * ivx[i]
                )
    for i in range(nx):
        for j in range(ny):
            for k in range(nz + 1):
                Hz[i + 1, j + 1, k] -= ch * (
                    (Ey[i + 1, j, k] - Ey[i, j, k]) * ivx[i]
                    - (Ex[i, j + 1, k] - Ex[i, j, k]) * ivy[j]
                )


@numba.njit(**_JIT)
def cpml_e(
    Ex, Ey, Ez, Hx, Hy, Hz,
    cbx, cby, cbz,
    ivxd, ivyd, ivzd,
    be_x, ce_x, be_y, ce_y, be_z, ce_z,
    p_ex_y, p_ex_z, p_ey_z, p_ey_x, p_ez_x, p_ez_y,
):
    nx = Ex.shape[0]
    ny = Ey.shape[1]
    nz = Ez.shape[2]
    # Ex: +d/dy Hz, -d/dz Hy
    for j in range(ny + 1):
        if ce_y[j] != 0.0:
            for i in range(nx):
                for k in range(nz + 1):
                    d = (Hz[i + 1, j + 1, k] - Hz[i + 1, j, k]) * ivyd[j]
                    p = be_y[j] * p_ex_y[i, j, k] + ce_y[j] * d
                    p_ex_y[i, j, k] = p
                    Ex[i, j, k] += cbx[i, j, k] * p
    for k in range(nz + 1):
        if ce_z[k] != 0.0:
            for i in range(nx):
                for j in range(ny + 1):
                    d = (Hy[i + 1, j, k + 1] - Hy[i + 1, j, k]) * ivzd[k]
                    p = be_z[k] * p_ex_z[i, j, k] + ce_z[k] * d
                    p_ex_z[i, j, k] = p
                    Ex[i, j, k] -= cbx[i, j, k] * p
    # Ey: +d/dz Hx, -d/dx Hz
    for k in range(nz + 1):
        if ce_z[k] != 0.0:
            for i in range(nx + 1):
                for j in range(ny):
                    d = (Hx[i, j + 1, k + 1] - Hx[i, j + 1, k]) * ivzd[k]
                    p = be_z[k] * p_ey_z[i, j, k] + ce_z[k] * d
                    p_ey_z[i, j, k] = p
                    Ey[i, j, k] += cby[i, j, k] * p
    for i in range(nx + 1):
        if ce_x[i] != 0.0:
            for j in range(ny):
                for k in range(nz + 1):
                    d = (Hz[i + 1, j + 1, k] - Hz[i, j + 1, k]) * ivxd[i]
                    p = be_x[i] * p_ey_x[i, j, k] + ce_x[i] * d
                    p_ey_x[i, j, k] = p
                    Ey[i, j, k] -= cby[i, j, k] * p
    # Ez: +d/dx Hy, -d/dy Hx
    for i in range(nx + 1):
        if ce_x[i] != 0.0:
            for j in range(ny + 1):
                for k in range(nz):
                    d = (Hy[i + 1, j, k + 1] - Hy[i, j, k + 1]) * ivxd[i]
                    p = be_x[i] * p_ez_x[i, j, k] + ce_x[i] * d
                    p_ez_x[i, j, k] = p
                    Ez[i, j, k] += cbz[i, j, k] * p
    for j in range(ny + 1):
        if ce_y[j] != 0.0:
            for i in range(nx + 1):
                for k in range(nz):
                    d = (Hx[i, j + 1, k + 1] - Hx[i, j, k + 1]) * ivyd[j]
                    p = be_y[j] * p_ez_y[i, j, k] + ce_y[j] * d
                    p_ez_y[i, j, k] = p
                    Ez[i, j, k] -= cbz[i, j, k] * p


@numba.njit(**_JIT)
def cpml_h(
    Ex, Ey, Ez, Hx, Hy, Hz,
    ch,
    ivx, ivy, ivz,
    bh_x, ch_x, bh_y, ch_y, bh_z, ch_z,
    p_hx_y, p_hx_z, p_hy_z, p_hy_x, p_hz_x, p_hz_y,
):
    nx = Ex.shape[0]
    ny = Ey.shape[1]
    nz = Ez.shape[2]
    # Hx: -= ch*(d/dy Ez - d/dz Ey)
    for j in range(ny):
        if ch_y[j] != 0.0:
            for i in range(nx + 1):
                for k in range(nz):
                    d = (Ez[i, j + 1, k] - Ez[i, j, k]) * ivy[j]
                    p = bh_y[j] * p_hx_y[i, j, k] + ch_y[j] * d
                    p_hx_y[i, j, k] = p
                    Hx[i, j + 1, k + 1] -= ch * p
    for k in range(nz):
        if ch_z[k] != 0.0:
            for i in range(nx + 1):
                for j in range(ny):
                    d = (Ey[i, j, k + 1] - Ey[i, j, k]) * ivz[k]
                    p = bh_z[k] * p_hx_z[i, j, k] + ch_z[k] * d
                    p_hx_z[i, j, k] = p
                    Hx[i, j + 1, k + 1] += ch * p
    # Hy: -= ch*(d/dz Ex - d/dx Ez)
    for k in range(nz):
        if ch_z[k] != 0.0:
            for i in range(nx):
                for j in range(ny + 1):
                    d = (Ex[i, j, k + 1] - Ex[i, j, k]) * ivz[k]
                    p = bh_z[k] * p_hy_z[i, j, k] + ch_z[k] * d
                    p_hy_z[i, j, k] = p
                    Hy[i + 1, j, k + 1] -= ch * p
    for i in range(nx):
        if ch_x[i] != 0.0:
            for j in range(ny + 1):
                for k in range(nz):
                    d = (Ez[i + 1, j, k] - Ez[i, j, k]) * ivx[i]
                    p = bh_x[i] * p_hy_x[i, j, k] + ch_x[i] * d
                    p_hy_x[i, j, k] = p
                    Hy[i + 1, j, k + 1] += ch * p
    # Hz: -= ch*(d/dx Ey - d/dy Ex)
    for i in range(nx):
        if ch_x[i] != 0.0:
            for j in range(ny):
                for k in range(nz + 1):
                    d = (Ey[i + 1, j, k] - Ey[i, j, k]) * ivx[i]
                    p = bh_x[i] * p_hz_x[i, j, k] + ch_x[i] * d
                    p_hz_x[i, j, k] = p
                    Hz[i + 1, j + 1, k] -= ch * p
    for j in range(ny):
        if ch_y[j] != 0.0:
            for i in range(nx):
                for k in range(nz + 1):
                    d = (Ex[i, j + 1, k] - Ex[i, j, k]) * ivy[j]
                    p = bh_y[j] * p_hz_y[i, j, k] + ch_y[j] * d
                    p_hz_y[i, j, k] = p
                    Hz[i + 1, j + 1, k] += ch * p


@numba.njit(**_JIT)
def inject_and_measure_v(Ez, port_ijk, c_src, vs, dz_gap, v_out):
    """Add the per-port source term, then record the gap voltages."""
    n = port_ijk.shape[0]
    for p in range(n):
        i, j, k = port_ijk[p, 0], port_ijk[p, 1], port_ijk[p, 2]
        Ez[i, j, k] += c_src[p] * vs[p]
        v_out[p] = -Ez[i, j, k] * dz_gap[p]


@numba.njit(**_JIT)
def measure_i(Hx, Hy, port_ijk, dx_dual, dy_dual, i_out):
    """Magnetic-field loop around each feed edge: current into the antenna."""
    n = port_ijk.shape[0]
    for p in range(n):
        i, j, k = port_ijk[p, 0], port_ijk[p, 1], port_ijk[p, 2]
        # padded H indexing: Hy phys (i,j,k) -> [i+1, j, k+1]; Hx -> [i, j+1, k+1]
        cur = (Hy[i + 1, j, k + 1] - Hy[i, j, k + 1]) * dy_dual[p] - (
            Hx[i, j + 1, k + 1] - Hx[i, j, k + 1]
        ) * dx_dual[p]
        i_out[p] = cur
