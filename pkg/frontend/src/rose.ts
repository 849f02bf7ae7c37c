// Polar rose geometry for the pseudo-label histogram and its fitted curve.
// Pure functions producing coordinates / SVG markup, so the chart logic is
// testable without a browser.

export class RoseError extends Error {}

export interface Point {
  x: number;
  y: number;
}

export interface Spoke {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface RoseGeometry {
  size: number;
  center: Point;
  radius: number;
  spokes: Spoke[];
  curvePath: string;
  markers: { point: Point; angleDeg: number }[];
}

// Angle 0 points up (toward the camera) and angles grow clockwise, matching
// the rendered rose figures on the Python side.
function polar(center: Point, radius: number, angleDeg: number): Point {
  const rad = ((angleDeg - 90) * Math.PI) / 180;
  return { x: center.x + radius * Math.cos(rad), y: center.y + radius * Math.sin(rad) };
}

export function computeRose(
  bins: number[],
  curve: number[] | null,
  candidates: number[] = [],
  size = 320,
): RoseGeometry {
  if (!bins || bins.length === 0) {
    throw new RoseError("empty histogram payload");
  }
  if (curve && curve.length !== bins.length) {
    throw new RoseError(`curve length ${curve.length} does not match histogram length ${bins.length}`);
  }
  const center = { x: size / 2, y: size / 2 };
  const radius = size * 0.44;
  const peak = Math.max(Math.max(...bins), curve ? Math.max(...curve) : 0);
  const scale = peak > 0 ? radius / peak : 0;
  const step = 360 / bins.length;

  const spokes = bins.map((value, i) => {
    const tip = polar(center, value * scale, i * step);
    return { x1: center.x, y1: center.y, x2: tip.x, y2: tip.y };
  });

  let curvePath = "";
  if (curve) {
    const points = curve.map((value, i) => polar(center, value * scale, i * step));
    points.push(points[0]); // close the loop
    curvePath = points
      .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
      .join(" ");
  }

  const markers = candidates.map((angleDeg) => ({
    point: polar(center, radius, angleDeg),
    angleDeg,
  }));

  return { size, center, radius, spokes, curvePath, markers };
}

export function renderRoseSVG(
  bins: number[],
  curve: number[] | null,
  candidates: number[] = [],
  size = 320,
): string {
  const g = computeRose(bins, curve, candidates, size);
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${g.size} ${g.size}" class="rose" role="img" aria-label="azimuth histogram rose">`,
  );
  parts.push(
    `<circle cx="${g.center.x}" cy="${g.center.y}" r="${g.radius}" class="rose-ring"/>`,
  );
  for (const s of g.spokes) {
    parts.push(
      `<line x1="${s.x1.toFixed(2)}" y1="${s.y1.toFixed(2)}" x2="${s.x2.toFixed(2)}" y2="${s.y2.toFixed(2)}" class="rose-spoke"/>`,
    );
  }
  if (g.curvePath) {
    parts.push(`<path d="${g.curvePath}" class="rose-curve" fill="none"/>`);
  }
  for (const m of g.markers) {
    parts.push(
      `<line x1="${g.center.x}" y1="${g.center.y}" x2="${m.point.x.toFixed(2)}" y2="${m.point.y.toFixed(2)}" class="rose-marker"/>`,
    );
    parts.push(
      `<circle cx="${m.point.x.toFixed(2)}" cy="${m.point.y.toFixed(2)}" r="4" class="rose-marker-dot"/>`,
    );
  }
  parts.push(`<text x="${g.center.x}" y="12" text-anchor="middle" class="rose-label">0°</text>`);
  parts.push("</svg>");
  return parts.join("");
}
