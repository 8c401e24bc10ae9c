/** Minimal SVG document builder; no DOM, just strings. */

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  line(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.parts.push(
      `<line x1="${r(x1)}" y1="${r(y1)}" x2="${r(x2)}" y2="${r(y2)}" ${style}/>`,
    );
  }

  polyline(points: Array<[number, number]>, style: string): void {
    const pts = points.map(([x, y]) => `${r(x)},${r(y)}`).join(" ");
    this.parts.push(`<polyline fill="none" points="${pts}" ${style}/>`);
  }

  polygon(points: Array<[number, number]>, style: string): void {
    const pts = points.map(([x, y]) => `${r(x)},${r(y)}`).join(" ");
    this.parts.push(`<polygon points="${pts}" ${style}/>`);
  }

  circle(x: number, y: number, radius: number, style: string): void {
    this.parts.push(`<circle cx="${r(x)}" cy="${r(y)}" r="${radius}" ${style}/>`);
  }

  text(x: number, y: number, content: string, style = ""): void {
    this.parts.push(`<text x="${r(x)}" y="${r(y)}" ${style}>${esc(content)}</text>`);
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" ` +
      `font-family="sans-serif" font-size="11">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

function r(v: number): string {
  return (Math.round(v * 100) / 100).toString();
}
