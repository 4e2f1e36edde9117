/** Client-side view state.
 *
 * The view never edits the tree itself; it only remembers what the
 * service last sent (geometry, handles) and transient UI state (open
 * menu, selection, text-window buffers, toasts).
 */

import {
  hitTest,
  rectOfNode,
  type Point,
  type WireGeometry,
  type WireRect,
} from "./geometry.js";

export const MENU_ITEM_HEIGHT = 16;
export const MENU_WIDTH = 140;

export interface MenuState {
  anchor: number;
  items: string[];
  x: number;
  y: number;
}

export interface TextWindow {
  buffer: string;
  visible: boolean;
  errorSpan: [number, number] | null;
}

export interface AliasPopup {
  node: number;
  candidates: string[];
}

export interface LayoutMirror {
  mode: string;
  hspace: number;
  vspace: number;
}

export class ViewState {
  docHandle: number | null = null;
  geometry: WireGeometry = { primitives: [], width: 0, height: 0 };
  selection: number | null = null;
  openTextWindows: Map<number, TextWindow> = new Map();
  layoutParams: LayoutMirror = {
    mode: "vertical_centered",
    hspace: 12,
    vspace: 16,
  };
  menu: MenuState | null = null;
  aliasPopup: AliasPopup | null = null;
  toasts: string[] = [];
  busy = false;

  setGeometry(geometry: WireGeometry): void {
    this.geometry = geometry;
    if (
      this.selection !== null &&
      rectOfNode(geometry, this.selection) === null
    ) {
      this.selection = null;
    }
    for (const node of [...this.openTextWindows.keys()]) {
      const rect = rectOfNode(geometry, node);
      if (rect === null || rect.label !== "T") {
        this.openTextWindows.delete(node);
      }
    }
  }

  openMenu(anchor: number, items: string[]): void {
    const rect = rectOfNode(this.geometry, anchor);
    this.menu = {
      anchor,
      items,
      x: rect ? rect.x + rect.w : 0,
      y: rect ? rect.y : 0,
    };
  }

  closeMenu(): void {
    this.menu = null;
  }

  /** Index of the menu item under the point, or null when outside. */
  menuItemAt(p: Point): number | null {
    if (!this.menu) {
      return null;
    }
    const within =
      p.x >= this.menu.x &&
      p.x <= this.menu.x + MENU_WIDTH &&
      p.y >= this.menu.y &&
      p.y <= this.menu.y + this.menu.items.length * MENU_ITEM_HEIGHT;
    if (!within) {
      return null;
    }
    const index = Math.floor((p.y - this.menu.y) / MENU_ITEM_HEIGHT);
    return index < this.menu.items.length ? index : null;
  }

  hit(p: Point): WireRect | null {
    return hitTest(this.geometry, p);
  }

  toast(message: string): void {
    this.toasts.push(message);
  }
}
