/** Minimal quaternion helpers, (w, x, y, z) convention. */

export type Quat = [number, number, number, number];

export const QUAT_IDENTITY: Quat = [1, 0, 0, 0];

export function quatMultiply(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatNormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  if (n === 0) return [...QUAT_IDENTITY];
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

/** Quaternion for a rotation of `angle` radians about a unit axis. */
export function quatFromAxisAngle(
  axis: [number, number, number],
  angle: number,
): Quat {
  const half = angle / 2;
  const s = Math.sin(half);
  return [Math.cos(half), s * axis[0], s * axis[1], s * axis[2]];
}

export function quatRotate(
  q: Quat,
  v: [number, number, number],
): [number, number, number] {
  const [w, x, y, z] = q;
  // v' = v + 2 q_vec x (q_vec x v + w v)
  const [vx, vy, vz] = v;
  const cx = y * vz - z * vy + w * vx;
  const cy = z * vx - x * vz + w * vy;
  const cz = x * vy - y * vx + w * vz;
  return [
    vx + 2 * (y * cz - z * cy),
    vy + 2 * (z * cx - x * cz),
    vz + 2 * (x * cy - y * cx),
  ];
}
