/** Editing workflow: translates pointer and keyboard gestures into
 * protocol requests and folds the responses back into view state.
 *
 * All structural knowledge stays on the service side; the controller
 * only asks (node_info, list_completions) and reacts.  One request is
 * in flight at a time and the view is marked busy while waiting.
 */

import type { Point } from "./geometry.js";
import { Client, ServiceError } from "./protocol.js";
import { ViewState } from "./view.js";

export const TEXT_ICON_MENU = [
  "Parse text",
  "Graphic tree",
  "Show window",
  "Hide window",
] as const;

export type TextWindowAction = "PARSE" | "GRAPHIC" | "SHOW" | "HIDE";

export interface PromptState {
  node: number;
}

export class EditorController {
  readonly client: Client;
  readonly view: ViewState;
  prompt: PromptState | null = null;
  textIconMenu: { node: number; items: readonly string[] } | null = null;

  constructor(client: Client, view: ViewState = new ViewState()) {
    this.client = client;
    this.view = view;
  }

  private async guarded<T>(body: () => Promise<T>): Promise<T | null> {
    if (this.view.busy) {
      return null;
    }
    this.view.busy = true;
    try {
      return await body();
    } catch (err) {
      if (err instanceof ServiceError) {
        this.view.toast(`the editor will protest: ${err.message}`);
        return null;
      }
      throw err;
    } finally {
      this.view.busy = false;
    }
  }

  private doc(): number {
    if (this.view.docHandle === null) {
      throw new Error("no open document");
    }
    return this.view.docHandle;
  }

  private async refresh(): Promise<void> {
    const p = this.view.layoutParams;
    this.view.setGeometry(
      await this.client.layout({
        doc: this.doc(),
        mode: p.mode,
        hspace: p.hspace,
        vspace: p.vspace,
      }),
    );
  }

  async newProgram(): Promise<void> {
    await this.guarded(async () => {
      const opened = await this.client.newProgram();
      this.view.docHandle = opened.doc;
      this.view.setGeometry(opened.geometry);
    });
  }

  async openStored(name: string): Promise<void> {
    await this.guarded(async () => {
      const opened = await this.client.storeLoad(name);
      this.view.docHandle = opened.doc;
      this.view.setGeometry(opened.geometry);
    });
  }

  /** Left click: menu selection, placeholder menus, text-icon toggle,
   * node selection, or cancel of an open menu. */
  async clickAt(p: Point): Promise<void> {
    if (this.view.menu) {
      const index = this.view.menuItemAt(p);
      const state = {
        anchor: this.view.menu.anchor,
        items: this.view.menu.items,
      };
      this.view.closeMenu();
      if (index !== null) {
        await this.expandFromMenu(state, index);
      }
      return;
    }
    this.view.aliasPopup = null;
    const rect = this.view.hit(p);
    if (!rect) {
      this.view.selection = null;
      return;
    }
    if (rect.label === "T") {
      this.toggleTextWindow(rect.node);
      return;
    }
    await this.guarded(async () => {
      const info = await this.client.request("node_info", {
        doc: this.doc(),
        node: rect.node,
      });
      if (info.kind === "placeholder") {
        const items = await this.client.listCompletions(
          this.doc(),
          rect.node,
        );
        this.view.openMenu(rect.node, items);
      } else if (info.kind === "leaf" && info.text === null) {
        this.prompt = { node: rect.node };
      } else {
        this.view.selection = rect.node;
      }
    });
  }

  /** Middle click (or long press) on a text icon opens its menu. */
  middleClickAt(p: Point): readonly string[] | null {
    const rect = this.view.hit(p);
    if (rect && rect.label === "T") {
      this.textIconMenu = { node: rect.node, items: TEXT_ICON_MENU };
      return TEXT_ICON_MENU;
    }
    this.textIconMenu = null;
    return null;
  }

  private async expandFromMenu(
    state: { anchor: number; items: string[] },
    index: number,
  ): Promise<void> {
    await this.guarded(async () => {
      const node = await this.client.expand(
        this.doc(),
        state.anchor,
        state.items[index],
      );
      await this.refresh();
      const info = await this.client.request("node_info", {
        doc: this.doc(),
        node,
      });
      if (info.kind === "placeholder") {
        const items = await this.client.listCompletions(this.doc(), node);
        this.view.openMenu(node, items);
      } else if (info.kind === "leaf" && info.text === null) {
        this.prompt = { node };
      }
    });
  }

  /** Programmatic menu choice by item name, used by keyboard access. */
  async chooseItem(item: string): Promise<void> {
    const menu = this.view.menu;
    if (!menu) {
      return;
    }
    const index = menu.items.indexOf(item);
    if (index < 0) {
      this.view.toast(`no menu item named ${item}`);
      return;
    }
    const state = { anchor: menu.anchor, items: menu.items };
    this.view.closeMenu();
    await this.expandFromMenu(state, index);
  }

  /** Terminal-entry prompt submission. */
  async submitTerminal(text: string): Promise<void> {
    const prompt = this.prompt;
    if (!prompt) {
      return;
    }
    const done = await this.guarded(async () => {
      await this.client.setTerminal(this.doc(), prompt.node, text);
      await this.refresh();
      return true;
    });
    if (done) {
      this.prompt = null;
    }
  }

  cancelPrompt(): void {
    this.prompt = null;
  }

  /** Left click on a "T" icon shows the window if hidden, hides it if
   * shown; the first click creates the buffer. */
  toggleTextWindow(node: number): void {
    const win = this.view.openTextWindows.get(node);
    if (!win) {
      this.view.openTextWindows.set(node, {
        buffer: "",
        visible: true,
        errorSpan: null,
      });
    } else {
      win.visible = !win.visible;
    }
  }

  async textWindowAction(
    node: number,
    action: TextWindowAction,
  ): Promise<void> {
    const win = this.view.openTextWindows.get(node);
    if (!win) {
      this.view.toast("no text window for this icon");
      return;
    }
    switch (action) {
      case "SHOW":
        win.visible = true;
        return;
      case "HIDE":
        win.visible = false;
        return;
      case "PARSE":
        await this.guarded(async () => {
          try {
            await this.client.parseSubtree(
              this.doc(),
              node,
              win.buffer,
              true,
            );
            win.errorSpan = null;
            this.view.toast("text parses cleanly");
          } catch (err) {
            if (err instanceof ServiceError) {
              win.errorSpan = spanFromMessage(err.message, win.buffer);
              return;
            }
            throw err;
          }
        });
        return;
      case "GRAPHIC":
        await this.guarded(async () => {
          await this.client.parseSubtree(this.doc(), node, win.buffer);
          this.view.openTextWindows.delete(node);
          await this.refresh();
        });
        return;
    }
  }

  /** Extension key inside a text window: expand the trailing word. */
  async extensionKey(node: number): Promise<void> {
    const win = this.view.openTextWindows.get(node);
    if (!win) {
      return;
    }
    const m = /[A-Za-z_][A-Za-z0-9_]*$/.exec(win.buffer);
    if (!m) {
      return;
    }
    const prefix = m[0];
    await this.guarded(async () => {
      const match = await this.client.aliasExpand(prefix);
      if (match.kind === "UNIQUE" && match.expansion) {
        win.buffer =
          win.buffer.slice(0, win.buffer.length - prefix.length) +
          match.expansion;
      } else if (match.kind === "AMBIGUOUS") {
        this.view.aliasPopup = {
          node,
          candidates: match.candidates ?? [],
        };
      } else {
        this.view.toast(`no expansion for ${prefix}`);
      }
    });
  }

  /** Picking one entry from the ambiguity pop-up. */
  pickAliasCandidate(candidate: string): void {
    const popup = this.view.aliasPopup;
    if (!popup) {
      return;
    }
    const win = this.view.openTextWindows.get(popup.node);
    if (win) {
      const m = /[A-Za-z_][A-Za-z0-9_]*$/.exec(win.buffer);
      if (m) {
        win.buffer =
          win.buffer.slice(0, win.buffer.length - m[0].length) + candidate;
      }
    }
    this.view.aliasPopup = null;
  }

  async iconify(node: number, textual: boolean): Promise<void> {
    await this.guarded(async () => {
      await this.client.setDisplay(
        this.doc(),
        node,
        textual ? "iconified_text" : "iconified_graphic",
      );
      await this.refresh();
    });
  }

  /** Spacing sliders re-request layout with the mirrored parameters. */
  async setSpacing(hspace: number, vspace: number): Promise<void> {
    this.view.layoutParams.hspace = hspace;
    this.view.layoutParams.vspace = vspace;
    await this.guarded(() => this.refresh());
  }

  async setMode(mode: string): Promise<void> {
    this.view.layoutParams.mode = mode;
    await this.guarded(() => this.refresh());
  }

  /** Undo affordance bound to the service undo op. */
  async undo(): Promise<void> {
    await this.guarded(async () => {
      await this.client.undo(this.doc());
      await this.refresh();
    });
  }

  async saveUnderDefaultName(): Promise<string | null> {
    return this.guarded(() => this.client.storeSave(this.doc()));
  }
}

/** Best-effort error span from "...at 12..17" style messages. */
function spanFromMessage(
  message: string,
  buffer: string,
): [number, number] {
  const m = /(\d+)\.\.(\d+)/.exec(message);
  if (m) {
    return [Number(m[1]), Number(m[2])];
  }
  return [0, buffer.length];
}
