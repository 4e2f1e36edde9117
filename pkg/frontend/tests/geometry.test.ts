import { describe, expect, it } from "vitest";
import {
  hitTest,
  rectOfNode,
  rectsOf,
  segsOf,
  type WireGeometry,
} from "../src/geometry.js";

const SAMPLE: WireGeometry = {
  width: 100,
  height: 60,
  primitives: [
    { type: "seg", node: 2, x1: 50, y1: 10, x2: 50, y2: 40 },
    { type: "rect", node: 1, x: 10, y: 0, w: 80, h: 20, label: "outer", fill: "none" },
    { type: "rect", node: 2, x: 40, y: 5, w: 20, h: 10, label: "inner", fill: "none" },
    { type: "text", node: 1, x: 14, y: 4, text: "outer" },
  ],
};

describe("hitTest", () => {
  it("returns the later-painted rect when boxes overlap", () => {
    expect(hitTest(SAMPLE, { x: 50, y: 10 })?.node).toBe(2);
  });

  it("returns the only containing rect otherwise", () => {
    expect(hitTest(SAMPLE, { x: 12, y: 10 })?.node).toBe(1);
  });

  it("returns null for points outside every rect", () => {
    expect(hitTest(SAMPLE, { x: 0, y: 50 })).toBeNull();
  });

  it("treats rect edges as inside", () => {
    expect(hitTest(SAMPLE, { x: 10, y: 0 })?.node).toBe(1);
  });
});

describe("accessors", () => {
  it("filters primitives by type", () => {
    expect(rectsOf(SAMPLE)).toHaveLength(2);
    expect(segsOf(SAMPLE)).toHaveLength(1);
  });

  it("finds a rect by node id", () => {
    expect(rectOfNode(SAMPLE, 2)?.label).toBe("inner");
    expect(rectOfNode(SAMPLE, 99)).toBeNull();
  });
});
