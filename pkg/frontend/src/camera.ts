/** Orbit camera over the engine's pinhole convention: world_to_camera is a
 * row-major rigid transform, camera looks down +z, image y grows downward.
 *
 * Orbit (not free flight) because sparse-view scenes only stay plausible in
 * a narrow shell around the input poses; the bounds default to small
 * excursions around them. */

export type Vec3 = [number, number, number];

export interface Intrinsics {
    fx: number;
    fy: number;
    cx: number;
    cy: number;
    width: number;
    height: number;
}

export interface OrbitBounds {
    minDistance: number;
    maxDistance: number;
    maxElevation: number; // radians, symmetric; < pi/2 to keep `right` defined
}

export const DEFAULT_BOUNDS: OrbitBounds = {
    minDistance: 0.5,
    maxDistance: 50,
    maxElevation: 1.4,
};

function cross(a: Vec3, b: Vec3): Vec3 {
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}

function normalize(v: Vec3): Vec3 {
    const n = Math.hypot(v[0], v[1], v[2]);
    return [v[0] / n, v[1] / n, v[2] / n];
}

export class OrbitCamera {
    constructor(
        public target: Vec3,
        public distance: number,
        public azimuth: number = 0,
        public elevation: number = 0,
        public readonly bounds: OrbitBounds = DEFAULT_BOUNDS,
    ) {
        this.clamp();
    }

    clamp(): void {
        this.distance = Math.min(
            Math.max(this.distance, this.bounds.minDistance),
            this.bounds.maxDistance,
        );
        this.elevation = Math.min(
            Math.max(this.elevation, -this.bounds.maxElevation),
            this.bounds.maxElevation,
        );
        // keep azimuth in (-pi, pi] so slider UIs stay bounded
        this.azimuth = Math.atan2(Math.sin(this.azimuth), Math.cos(this.azimuth));
    }

    orbit(dAzimuth: number, dElevation: number): void {
        this.azimuth += dAzimuth;
        this.elevation += dElevation;
        this.clamp();
    }

    zoom(factor: number): void {
        this.distance *= factor;
        this.clamp();
    }

    /** Unit vector from the camera toward the target (camera +z in world). */
    forward(): Vec3 {
        const ce = Math.cos(this.elevation);
        return [
            Math.sin(this.azimuth) * ce,
            Math.sin(this.elevation),
            Math.cos(this.azimuth) * ce,
        ];
    }

    position(): Vec3 {
        const f = this.forward();
        return [
            this.target[0] - this.distance * f[0],
            this.target[1] - this.distance * f[1],
            this.target[2] - this.distance * f[2],
        ];
    }

    /** Row-major 4x4 world-to-camera matrix as 16 floats. */
    worldToCamera(): number[] {
        const f = this.forward();
        const right = normalize(cross([0, 1, 0], f));
        const down = cross(f, right); // camera y axis (image y) in world
        const p = this.position();
        const rows: Vec3[] = [right, down, f];
        const m: number[] = [];
        for (const r of rows) {
            m.push(r[0], r[1], r[2], -(r[0] * p[0] + r[1] * p[1] + r[2] * p[2]));
        }
        m.push(0, 0, 0, 1);
        return m;
    }

    toCameraJson(intr: Intrinsics) {
        return { ...intr, world_to_camera: this.worldToCamera() };
    }
}
