// Dual three.js views: protein layout left, maxent-stress layout right.
// Cameras are client-only state and survive snapshot updates; geometry is
// rebuilt in place from the latest ViewData.

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

import type { Snapshot } from "./protocol";
import { buildViewData, type ViewData } from "./viewdata";

const NODE_SEGMENTS = 12;

class GraphView {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private nodes: THREE.InstancedMesh | null = null;
  private lines: THREE.LineSegments | null = null;
  private fitted = false;
  nodeCount = 0;

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.scene.background = new THREE.Color(0x10141c);
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.01, 5000);
    this.camera.position.set(0, 0, 10);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.enableDamping = true;
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.9));
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(1, 1, 2);
    this.scene.add(key);
    const animate = () => {
      requestAnimationFrame(animate);
      this.controls.update();
      this.resize();
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  private resize() {
    const w = this.canvas.clientWidth;
    const h = this.canvas.clientHeight;
    if (w === 0 || h === 0) return;
    const size = new THREE.Vector2();
    this.renderer.getSize(size);
    if (size.x !== w || size.y !== h) {
      this.renderer.setSize(w, h, false);
      this.camera.aspect = w / h;
      this.camera.updateProjectionMatrix();
    }
  }

  update(data: ViewData) {
    this.nodeCount = data.count;
    this.disposeMeshes();

    const box = new THREE.Box3();
    for (let i = 0; i < data.count; i++) {
      box.expandByPoint(
        new THREE.Vector3(
          data.positions[i * 3],
          data.positions[i * 3 + 1],
          data.positions[i * 3 + 2],
        ),
      );
    }
    const span = data.count > 0 ? box.getSize(new THREE.Vector3()).length() : 1;
    const radius = Math.max(span / Math.max(Math.cbrt(data.count) * 24, 1), 1e-3);

    const geom = new THREE.SphereGeometry(radius, NODE_SEGMENTS, NODE_SEGMENTS);
    const mat = new THREE.MeshLambertMaterial();
    this.nodes = new THREE.InstancedMesh(geom, mat, data.count);
    const m = new THREE.Matrix4();
    const color = new THREE.Color();
    for (let i = 0; i < data.count; i++) {
      m.makeTranslation(
        data.positions[i * 3],
        data.positions[i * 3 + 1],
        data.positions[i * 3 + 2],
      );
      this.nodes.setMatrixAt(i, m);
      color.setRGB(data.colors[i * 3], data.colors[i * 3 + 1], data.colors[i * 3 + 2]);
      this.nodes.setColorAt(i, color);
    }
    this.nodes.instanceMatrix.needsUpdate = true;
    if (this.nodes.instanceColor) this.nodes.instanceColor.needsUpdate = true;
    this.scene.add(this.nodes);

    const edgePositions = new Float32Array(data.edges.length * 3);
    for (let k = 0; k < data.edges.length; k++) {
      const v = data.edges[k];
      edgePositions[k * 3] = data.positions[v * 3];
      edgePositions[k * 3 + 1] = data.positions[v * 3 + 1];
      edgePositions[k * 3 + 2] = data.positions[v * 3 + 2];
    }
    const lineGeom = new THREE.BufferGeometry();
    lineGeom.setAttribute("position", new THREE.BufferAttribute(edgePositions, 3));
    this.lines = new THREE.LineSegments(
      lineGeom,
      new THREE.LineBasicMaterial({ color: 0x8899aa, transparent: true, opacity: 0.45 }),
    );
    this.scene.add(this.lines);

    if (!this.fitted && data.count > 0) {
      // initial framing only; afterwards the camera belongs to the user
      const center = box.getCenter(new THREE.Vector3());
      this.controls.target.copy(center);
      this.camera.position.copy(center).add(new THREE.Vector3(0, 0, Math.max(span, 1) * 1.2));
      this.camera.near = Math.max(span / 1000, 0.001);
      this.camera.far = Math.max(span * 10, 100);
      this.camera.updateProjectionMatrix();
      this.fitted = true;
    }
  }

  private disposeMeshes() {
    for (const obj of [this.nodes, this.lines]) {
      if (!obj) continue;
      this.scene.remove(obj);
      obj.geometry.dispose();
      (obj.material as THREE.Material).dispose();
    }
    this.nodes = null;
    this.lines = null;
  }
}

export class DualView {
  private left: GraphView;
  private right: GraphView;

  constructor(leftCanvas: HTMLCanvasElement, rightCanvas: HTMLCanvasElement) {
    this.left = new GraphView(leftCanvas);
    this.right = new GraphView(rightCanvas);
  }

  render(snapshot: Snapshot) {
    this.left.update(buildViewData(snapshot, "protein"));
    this.right.update(buildViewData(snapshot, "maxent"));
  }

  get nodeCounts(): [number, number] {
    return [this.left.nodeCount, this.right.nodeCount];
  }
}
